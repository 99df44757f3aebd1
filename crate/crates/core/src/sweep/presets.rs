//! Ready-made sweeps, one per figure. Each preset is a list of panels; a
//! panel is a full grid or a one-dimensional slice of one.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use super::{Axis, Param, Quantity, SliceAt, SweepSpec};
use crate::error::{Error, Result};
use crate::model::{HamiltonianVariant, ModelConfig};

pub const PRESET_NAMES: [&str; 7] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

pub const DEFAULT_STEPS: usize = 41;

/// Gate imperfections of the four-panel figures, with their panel letters.
const THETAS: [(f64, &str, &str); 4] = [
    (0.0, "a", "theta_0"),
    (FRAC_PI_8, "b", "theta_pi_8"),
    (FRAC_PI_4, "c", "theta_pi_4"),
    (0.9 * FRAC_PI_2, "d", "theta_0.9pi_2"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    /// File stem, e.g. `fig2a`.
    pub label: String,
    pub spec: SweepSpec,
    pub slice: Option<SliceAt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub panels: Vec<Panel>,
    /// Recorded in every panel's sidecar.
    pub notes: Vec<String>,
}

const GAUGE_NOTE: &str = "optimum angles are canonical: x in [0, pi], y in [0, 2pi), with y set to 0 when x is within 1e-9 of a pole; basis_alignment = max(cos(x_psi/2), sin(x_psi/2))";
const RANGE_NOTE: &str = "axis ranges alpha in [0, 3], p in [0, 0.5] are a choice that contains every landmark named in the text";

fn spec(base: ModelConfig, axis1: Param, quantity: Quantity, variant: HamiltonianVariant, steps: usize, seed: u64) -> SweepSpec {
    SweepSpec {
        base,
        axis1: Axis::default_for(axis1, steps),
        axis2: Axis::default_for(Param::P, steps),
        quantity,
        seed,
        hamiltonian_variant: variant,
    }
}

fn three_qubit(theta: f64) -> ModelConfig {
    ModelConfig { theta, ..ModelConfig::default() }
}

fn eight_qubit(theta: f64) -> ModelConfig {
    ModelConfig { theta, n_env: 8, observed: 7, ..ModelConfig::default() }
}

/// `steps` points per axis (41 reproduces the published grids).
pub fn preset(name: &str, steps: usize, seed: u64) -> Result<Preset> {
    use HamiltonianVariant::*;
    let panel = |label: String, spec: SweepSpec| Panel { label, spec, slice: None };
    let per_theta = |fig: &str, thetas: &[(f64, &str, &str)], make: &dyn Fn(f64) -> SweepSpec| -> Vec<Panel> {
        thetas.iter().map(|&(theta, letter, _)| panel(format!("{fig}{letter}"), make(theta))).collect()
    };
    let (name, panels, notes): (&'static str, Vec<Panel>, Vec<String>) = match name {
        "fig1" => (
            "fig1",
            vec![panel(
                "fig1".into(),
                spec(three_qubit(0.0), Param::Alpha2, Quantity::OptimalBasisParams, Eq6Full, steps, seed),
            )],
            vec![GAUGE_NOTE.into(), RANGE_NOTE.into()],
        ),
        "fig2" => (
            "fig2",
            per_theta("fig2", &THETAS, &|theta| {
                spec(three_qubit(theta), Param::Alpha2, Quantity::SbsDistance, Eq6Full, steps, seed)
            }),
            vec![GAUGE_NOTE.into(), RANGE_NOTE.into()],
        ),
        "fig3" => {
            let mut panels = Vec::new();
            for (letter, fixed) in [("a", SliceAt { param: Param::P, value: 0.0 }), ("b", SliceAt { param: Param::Alpha2, value: 0.0 })] {
                for &(theta, _, tag) in &THETAS {
                    panels.push(Panel {
                        label: format!("fig3{letter}_{tag}"),
                        spec: spec(three_qubit(theta), Param::Alpha2, Quantity::SbsDistance, Eq6Full, steps, seed),
                        slice: Some(fixed),
                    });
                }
            }
            (
                "fig3",
                panels,
                vec![
                    "fig3a: distance against alpha2 at p = 0; fig3b: distance against p at alpha2 = 0".into(),
                    GAUGE_NOTE.into(),
                ],
            )
        }
        "fig4" => (
            "fig4",
            per_theta("fig4", &THETAS, &|theta| {
                spec(three_qubit(theta), Param::Alpha2, Quantity::Delta, Eq6Full, steps, seed)
            }),
            vec!["delta = D(Hadamard basis) - D(computational basis); positive favours the computational basis".into(), RANGE_NOTE.into()],
        ),
        "fig5" => (
            "fig5",
            per_theta("fig5", &THETAS[..2], &|theta| {
                spec(three_qubit(theta), Param::Alpha3, Quantity::SbsDistance, RingEq30, steps, seed)
            }),
            vec![
                "the environment interaction is the doubled pair term 2 Z1 Z2 (the two-qubit ring)".into(),
                "the second axis is not stated for this figure; (alpha3, p) is used by analogy with fig2".into(),
                GAUGE_NOTE.into(),
            ],
        ),
        "fig6" => (
            "fig6",
            per_theta("fig6", &THETAS, &|theta| {
                spec(eight_qubit(theta), Param::Alpha2, Quantity::UpperBound, CentralOnly, steps, seed)
            }),
            vec!["8 environment qubits, 7 observed; values are the upper bound 2(gamma + sqrt(c0 c1) F)".into(), RANGE_NOTE.into()],
        ),
        "fig7" => (
            "fig7",
            per_theta("fig7", &THETAS, &|theta| {
                spec(eight_qubit(theta), Param::Alpha3, Quantity::UpperBound, RingEq30, steps, seed)
            }),
            vec![
                "8 environment qubits in a closed ZZ ring, 7 observed, alpha1 = alpha2 = 0; values are the upper bound".into(),
                "one (alpha3, p) panel per gate imperfection".into(),
            ],
        ),
        other => {
            return Err(Error::arg(format!(
                "unknown preset {other:?} (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(Preset { name, panels, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for name in PRESET_NAMES {
            let p = preset(name, DEFAULT_STEPS, 0).unwrap();
            assert!(!p.panels.is_empty());
            for panel in &p.panels {
                panel.spec.validate().unwrap();
                assert_eq!(panel.spec.axis1.steps, 41);
            }
        }
        assert!(preset("fig8", 41, 0).unwrap_err().is_argument());
    }

    #[test]
    fn fig2_panels_follow_theta() {
        let p = preset("fig2", 11, 3).unwrap();
        let labels: Vec<_> = p.panels.iter().map(|x| x.label.as_str()).collect();
        assert_eq!(labels, ["fig2a", "fig2b", "fig2c", "fig2d"]);
        assert_eq!(p.panels[3].spec.base.theta, 0.9 * FRAC_PI_2);
        assert_eq!(p.panels[0].spec.seed, 3);
        let fig6 = preset("fig6", 11, 0).unwrap();
        assert_eq!((fig6.panels[0].spec.base.n_env, fig6.panels[0].spec.base.observed), (8, 7));
    }
}
