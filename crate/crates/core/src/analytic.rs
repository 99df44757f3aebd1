//! Closed forms for the two-environment-qubit model.
//!
//! With the shift (π − α₁)·I removed, the total Hamiltonian is block diagonal
//! in the system's computational basis: `M0` (system |0⟩) is diagonal and
//! `M1` (system |1⟩) is a real symmetric 4×4 matrix whose exponential has a
//! closed form in `x = π cos θ`, `y = π sin θ − 2α₂ + 2α₃` and `w = √(x² + y²)`.
//! Everything here divides by `w²`, so configurations with `w < 1e-8` are
//! rejected with [`Error::Singularity`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, DensityMatrix, C64, PSD_TOL};
use crate::model::{HamiltonianVariant, ModelConfig};

/// Below this `w` the closed forms are not evaluated.
pub const MIN_W: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralParams {
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    #[serde(skip)]
    pub u1: C64,
    #[serde(skip)]
    pub u2: C64,
    #[serde(skip)]
    pub u3: C64,
}

/// Entries of the system-|1⟩ propagator block, `V1 = R + iQ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VBlockEntries {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub q1: f64,
    pub q2: f64,
}

impl VBlockEntries {
    /// Residuals of the five algebraic identities the entries satisfy
    /// (all zero for exact arithmetic).
    pub fn identity_residuals(&self) -> [f64; 5] {
        let VBlockEntries { r1, r2, r3, r4, q1, q2 } = *self;
        [
            r1 * r1 + q1 * q1 - r4 * r4,
            q2 * q2 + r2 * r2 + r3 * r3 + r3,
            r1 * r2 + r2 * r3 - q1 * q2 + r2,
            q1 * r2 + q2 * r1 - q2 * r3 - q2,
            r4 - r3 - 1.0,
        ]
    }

    pub fn real_part(&self) -> ComplexMatrix {
        let VBlockEntries { r1, r2, r3, r4, .. } = *self;
        let rows = [
            [r1, r2, r2, r3],
            [r2, r4, r3, -r2],
            [r2, r3, r4, -r2],
            [r3, -r2, -r2, r1],
        ];
        ComplexMatrix::from_fn(4, 4, |i, j| c(rows[i][j], 0.0))
    }

    pub fn imaginary_part(&self) -> ComplexMatrix {
        let VBlockEntries { q1, q2, .. } = *self;
        let rows = [
            [-q1, q2, q2, 0.0],
            [q2, 0.0, 0.0, q2],
            [q2, 0.0, 0.0, q2],
            [0.0, q2, q2, q1],
        ];
        ComplexMatrix::from_fn(4, 4, |i, j| c(rows[i][j], 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormIntermediates {
    pub s1: f64,
    #[serde(skip)]
    pub s2: C64,
    pub mu: f64,
    pub nu: f64,
}

/// Every closed-form quantity for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedForms {
    pub spectral: SpectralParams,
    pub entries: VBlockEntries,
    pub intermediates: ClosedFormIntermediates,
    pub gamma: f64,
    pub fid: f64,
    pub thermal_dist: f64,
    pub c0: f64,
    pub c1: f64,
    #[serde(skip)]
    pub rho0: DensityMatrix,
    #[serde(skip)]
    pub rho1: DensityMatrix,
}

fn require_model(cfg: &ModelConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.n_env != 2 {
        return Err(Error::arg(format!(
            "closed forms exist only for n_env = 2, got {}",
            cfg.n_env
        )));
    }
    if cfg.resolved_variant() != HamiltonianVariant::Eq6Full {
        return Err(Error::arg(format!(
            "closed forms describe the eq6_full Hamiltonian, not {}",
            cfg.resolved_variant().name()
        )));
    }
    Ok(())
}

/// `x`, `y` and `w` for a gate imperfection and the coupling difference α₂ − α₃.
fn xyw(theta: f64, alpha_diff: f64) -> (f64, f64, f64) {
    let x = PI * theta.cos();
    let y = PI * theta.sin() - 2.0 * alpha_diff;
    (x, y, x.hypot(y))
}

pub fn spectral_params(cfg: &ModelConfig) -> Result<SpectralParams> {
    require_model(cfg)?;
    let (x, y, w) = xyw(cfg.theta, cfg.alpha2 - cfg.alpha3);
    if w < MIN_W {
        return Err(Error::Singularity { w });
    }
    let xi1 = -PI + 2.0 * cfg.alpha1 + 2.0 * cfg.alpha2 + 4.0 * cfg.alpha3;
    let xi2 = -PI + 2.0 * cfg.alpha1 - 2.0 * cfg.alpha3;
    let xi3 = -PI + 2.0 * cfg.alpha1 - 2.0 * cfg.alpha2;
    let phase = |xi: f64| C64::from_polar(1.0, -cfg.t * xi);
    Ok(SpectralParams {
        xi1,
        xi2,
        xi3,
        x,
        y,
        w,
        u1: phase(xi1),
        u2: phase(xi2),
        u3: phase(xi3),
    })
}

/// The two diagonal blocks of H_TOTAL − (π − α₁)·I.
pub fn m_blocks(cfg: &ModelConfig) -> Result<(ComplexMatrix, ComplexMatrix)> {
    require_model(cfg)?;
    let xi1 = -PI + 2.0 * cfg.alpha1 + 2.0 * cfg.alpha2 + 4.0 * cfg.alpha3;
    let xi2 = -PI + 2.0 * cfg.alpha1 - 2.0 * cfg.alpha3;
    let xi3 = -PI + 2.0 * cfg.alpha1 - 2.0 * cfg.alpha2;
    let m0 = crate::linalg::diagonal(&[xi1, xi2, xi2, xi3]);
    let (x, y, _) = xyw(cfg.theta, cfg.alpha2 - cfg.alpha3);
    let h = -0.5 * x;
    let rows = [[-y, h, h, 0.0], [h, 0.0, 0.0, h], [h, 0.0, 0.0, h], [0.0, h, h, y]];
    let m1 = ComplexMatrix::from_fn(4, 4, |i, j| c(rows[i][j], 0.0));
    Ok((m0, m1))
}

fn entries_from(x: f64, y: f64, w: f64, t: f64) -> VBlockEntries {
    let w2 = w * w;
    let (s, co) = (t * w).sin_cos();
    VBlockEntries {
        r1: 0.5 * (x * x + (w2 + y * y) * co) / w2,
        r2: -0.5 * x * y * (1.0 - co) / w2,
        r3: -0.5 * x * x * (1.0 - co) / w2,
        r4: 0.5 * (x * x * co + w2 + y * y) / w2,
        q1: -y * s / w,
        q2: 0.5 * x * s / w,
    }
}

/// r₄ depends on the couplings only through α₂ − α₃; sweeps over α₂ and α₃
/// can share it.
pub fn r4_reduced(theta: f64, alpha_diff: f64, t: f64) -> Result<f64> {
    let (x, y, w) = xyw(theta, alpha_diff);
    if w < MIN_W {
        return Err(Error::Singularity { w });
    }
    Ok(entries_from(x, y, w, t).r4)
}

/// The r/q entries plus the two propagator blocks V0 = exp(−itM0), V1 = exp(−itM1).
pub fn v_blocks(cfg: &ModelConfig) -> Result<(VBlockEntries, ComplexMatrix, ComplexMatrix)> {
    let sp = spectral_params(cfg)?;
    let entries = entries_from(sp.x, sp.y, sp.w, cfg.t);
    let mut v0 = ComplexMatrix::zeros(4, 4);
    for (k, u) in [sp.u1, sp.u2, sp.u2, sp.u3].into_iter().enumerate() {
        v0[(k, k)] = u;
    }
    let v1 = entries.real_part() + entries.imaginary_part() * c(0.0, 1.0);
    Ok((entries, v0, v1))
}

fn checked_sqrt(v: f64, what: &str) -> Result<f64> {
    if v < -PSD_TOL {
        Err(Error::numeric(format!("negative radicand {v:e} in {what}")))
    } else {
        Ok(v.max(0.0).sqrt())
    }
}

fn intermediates(p: f64, sp: &SpectralParams, e: &VBlockEntries) -> Result<(ClosedFormIntermediates, f64)> {
    let q = 1.0 - p;
    let s1 = (p * p + q * q) * e.r4;
    let s2 = p * q * (c(e.r1, e.q1) * e.r4 - c(e.r2, -e.q2).powi(2));
    let gamma = p * checked_sqrt(s1 + 2.0 * (sp.u1 * sp.u2.conj() * s2).re, "Γ")?
        + q * checked_sqrt(s1 + 2.0 * (sp.u2 * sp.u3.conj() * s2).re, "Γ")?;
    let mu = -p * q * (2.0 * e.r4 - 1.0) + 0.5 * e.r4;
    let nu = 0.5 * (1.0 - 2.0 * p).abs() * checked_sqrt(e.r4 * (e.r4 - 4.0 * (p - p * p) * (e.r4 - 1.0)), "ν")?;
    Ok((ClosedFormIntermediates { s1, s2, mu, nu }, gamma))
}

pub fn gamma_closed(cfg: &ModelConfig) -> Result<f64> {
    let sp = spectral_params(cfg)?;
    let e = entries_from(sp.x, sp.y, sp.w, cfg.t);
    intermediates(cfg.p, &sp, &e).map(|(_, g)| g)
}

fn conditional_from(p: f64, e: &VBlockEntries) -> Result<(DensityMatrix, DensityMatrix)> {
    let rho0 = DensityMatrix::new(crate::linalg::diagonal(&[p, 1.0 - p]))?;
    let off = c(e.r2, e.q2) * (1.0 - 2.0 * p);
    let rho1 = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            c(1.0 + p * (2.0 * e.r4 - 1.0) - e.r4, 0.0),
            off,
            off.conj(),
            c(p * (1.0 - 2.0 * e.r4) + e.r4, 0.0),
        ],
    );
    let rho1 = DensityMatrix::new(rho1).map_err(|err| Error::numeric(format!("closed-form ϱ₁ invalid: {err}")))?;
    Ok((rho0, rho1))
}

/// States of the observed environment qubit conditioned on the system being
/// |0⟩ or |1⟩, each normalized.
pub fn conditional_states(cfg: &ModelConfig) -> Result<(DensityMatrix, DensityMatrix)> {
    let sp = spectral_params(cfg)?;
    conditional_from(cfg.p, &entries_from(sp.x, sp.y, sp.w, cfg.t))
}

fn fidelity_from(mu: f64, nu: f64) -> Result<f64> {
    if mu - nu < -PSD_TOL {
        return Err(Error::numeric(format!("μ − ν = {:e} is negative", mu - nu)));
    }
    Ok((mu + nu).max(0.0).sqrt() + (mu - nu).max(0.0).sqrt())
}

/// (μ, ν, F) with F the fidelity of the two conditional states.
pub fn fidelity_closed(cfg: &ModelConfig) -> Result<(f64, f64, f64)> {
    let sp = spectral_params(cfg)?;
    let e = entries_from(sp.x, sp.y, sp.w, cfg.t);
    let (im, _) = intermediates(cfg.p, &sp, &e)?;
    Ok((im.mu, im.nu, fidelity_from(im.mu, im.nu)?))
}

/// Trace distance of ϱ₁ from the nearest thermal (diagonal) state, in both
/// of its equivalent forms: through the entries, and expanded in x, y, w.
pub fn thermal_distance_forms(cfg: &ModelConfig) -> Result<(f64, f64)> {
    let sp = spectral_params(cfg)?;
    let e = entries_from(sp.x, sp.y, sp.w, cfg.t);
    let by_entries = (1.0 - 2.0 * cfg.p).abs() * (e.r2 * e.r2 + e.q2 * e.q2).sqrt();
    let co = (cfg.t * sp.w).cos();
    let (x, y) = (sp.x, sp.y);
    let expanded = (0.5 - cfg.p).abs() * x * (1.0 - co).max(0.0).sqrt() * ((1.0 + co) * x * x + 2.0 * y * y).sqrt()
        / (x * x + y * y);
    Ok((by_entries, expanded))
}

pub fn thermal_distance(cfg: &ModelConfig) -> Result<f64> {
    let sp = spectral_params(cfg)?;
    let e = entries_from(sp.x, sp.y, sp.w, cfg.t);
    Ok((1.0 - 2.0 * cfg.p).abs() * checked_sqrt(e.r4 - e.r4 * e.r4, "thermal distance")?)
}

/// Populations of the system's computational basis states; constant in time.
pub fn branch_probabilities(cfg: &ModelConfig) -> Result<(f64, f64)> {
    require_model(cfg)?;
    Ok((0.5, 0.5))
}

/// All closed-form quantities at once.
pub fn closed_forms(cfg: &ModelConfig) -> Result<ClosedForms> {
    let sp = spectral_params(cfg)?;
    let e = entries_from(sp.x, sp.y, sp.w, cfg.t);
    let (im, gamma) = intermediates(cfg.p, &sp, &e)?;
    let fid = fidelity_from(im.mu, im.nu)?;
    let (rho0, rho1) = conditional_from(cfg.p, &e)?;
    Ok(ClosedForms {
        spectral: sp,
        entries: e,
        intermediates: im,
        gamma,
        fid,
        thermal_dist: thermal_distance(cfg)?,
        c0: 0.5,
        c1: 0.5,
        rho0,
        rho1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, identity, max_abs_diff, HermitianOperator};
    use crate::model::total_hamiltonian_3q;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn cfg(theta: f64, a1: f64, a2: f64, a3: f64, p: f64, t: f64) -> ModelConfig {
        ModelConfig {
            theta,
            alpha1: a1,
            alpha2: a2,
            alpha3: a3,
            p,
            t,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn spectral_examples() {
        let sp = spectral_params(&cfg(0.0, 0.0, 0.8, 0.8, 0.1, 1.0)).unwrap();
        assert!((sp.x - PI).abs() < 1e-15 && sp.y.abs() < 1e-15 && (sp.w - PI).abs() < 1e-15);
        let sp = spectral_params(&cfg(0.0, 0.0, 0.0, 0.0, 0.1, 1.0)).unwrap();
        assert_eq!((sp.xi1, sp.xi2, sp.xi3), (-PI, -PI, -PI));
    }

    #[test]
    fn singular_point_is_rejected() {
        let err = spectral_params(&cfg(FRAC_PI_2, 0.0, FRAC_PI_2, 0.0, 0.1, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
        assert!(gamma_closed(&cfg(FRAC_PI_2, 0.0, FRAC_PI_2 + 0.4, 0.4, 0.1, 1.0)).is_err());
    }

    #[test]
    fn wrong_model_is_rejected() {
        let c3 = ModelConfig { n_env: 3, ..ModelConfig::default() };
        assert!(spectral_params(&c3).unwrap_err().is_argument());
        let ring = ModelConfig { variant: Some(HamiltonianVariant::RingEq30), ..ModelConfig::default() };
        assert!(gamma_closed(&ring).unwrap_err().is_argument());
    }

    #[test]
    fn zero_time_blocks_are_identity() {
        let (e, v0, v1) = v_blocks(&cfg(0.4, 1.0, 2.0, 0.5, 0.2, 0.0)).unwrap();
        assert!((e.r1 - 1.0).abs() < 1e-15 && (e.r4 - 1.0).abs() < 1e-15);
        assert_eq!((e.r2, e.r3, e.q1, e.q2), (0.0, 0.0, 0.0, 0.0));
        assert!(max_abs_diff(&v0, &identity(4)) < 1e-15);
        assert!(max_abs_diff(&v1, &identity(4)) < 1e-15);
        assert!((gamma_closed(&cfg(0.4, 1.0, 2.0, 0.5, 0.2, 0.0)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn p_zero_gamma_is_sqrt_r4() {
        let cf = cfg(0.3, 0.2, 1.1, 0.4, 0.0, 1.0);
        let (e, _, _) = v_blocks(&cf).unwrap();
        assert!((gamma_closed(&cf).unwrap() - e.r4.sqrt()).abs() < 1e-15);
        let (_, rho1) = conditional_states(&cf).unwrap();
        let m = rho1.matrix();
        assert!((m[(0, 0)].re - (1.0 - e.r4)).abs() < 1e-15);
        assert!((m[(0, 1)] - c(e.r2, e.q2)).norm() < 1e-15);
    }

    #[test]
    fn maximally_mixed_environment() {
        let cf = cfg(0.3, 0.2, 1.1, 0.4, 0.5, 1.7);
        let (mu, nu, f) = fidelity_closed(&cf).unwrap();
        assert!((mu - 0.25).abs() < 1e-15 && nu == 0.0 && (f - 1.0).abs() < 1e-15);
        assert_eq!(thermal_distance(&cf).unwrap(), 0.0);
    }

    #[test]
    fn full_orthogonalization_gives_unit_fidelity_at_r4_one() {
        // θ = 0, α₂ − α₃ = 0, t = 2: cos(tw) = cos 2π = 1 so r₄ = 1
        let cf = cfg(0.0, 0.0, 0.0, 0.0, 0.0, 2.0);
        let (e, _, _) = v_blocks(&cf).unwrap();
        assert!((e.r4 - 1.0).abs() < 1e-14);
        let (_, _, f) = fidelity_closed(&cf).unwrap();
        assert!((f - 1.0).abs() < 1e-7);
    }

    #[test]
    fn m_blocks_match_hamiltonian() {
        let cf = cfg(0.9, 0.7, 1.3, 0.2, 0.1, 1.0);
        let (m0, m1) = m_blocks(&cf).unwrap();
        let h = total_hamiltonian_3q(&cf).unwrap().into_matrix();
        let shifted = h - identity(8) * c(PI - cf.alpha1, 0.0);
        assert!(max_abs_diff(&shifted.view((0, 0), (4, 4)).into_owned(), &m0) < 1e-12);
        assert!(max_abs_diff(&shifted.view((4, 4), (4, 4)).into_owned(), &m1) < 1e-12);
        assert!(shifted.view((0, 4), (4, 4)).iter().all(|z| z.norm() < 1e-15));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn identities_hold(
            theta in 0.0..=FRAC_PI_2,
            a2 in 0.0..3.0f64,
            a3 in 0.0..3.0f64,
            t in 0.0..5.0f64,
        ) {
            let cf = cfg(theta, 0.5, a2, a3, 0.2, t);
            prop_assume!(spectral_params(&cf).is_ok());
            let (e, _, v1) = v_blocks(&cf).unwrap();
            for r in e.identity_residuals() {
                prop_assert!(r.abs() < 1e-10);
            }
            prop_assert!(e.r3 >= -1.0 - 1e-10 && e.r3 <= 1e-10);
            prop_assert!(e.r4 >= -1e-10 && e.r4 <= 1.0 + 1e-10);
            let (_, m1) = m_blocks(&cf).unwrap();
            let direct = expm_hermitian(&HermitianOperator::new(m1).unwrap(), t).unwrap();
            prop_assert!(max_abs_diff(&direct, &v1) < 1e-10);
        }

        #[test]
        fn thermal_forms_agree(
            theta in 0.0..=FRAC_PI_2,
            a2 in 0.0..3.0f64,
            a3 in 0.0..3.0f64,
            p in 0.0..=0.5f64,
            t in 0.0..5.0f64,
        ) {
            let cf = cfg(theta, 0.0, a2, a3, p, t);
            prop_assume!(spectral_params(&cf).is_ok());
            let (a, b) = thermal_distance_forms(&cf).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
            let d = thermal_distance(&cf).unwrap();
            prop_assert!((d - a).abs() < 1e-10);
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn closed_forms_in_range(
            theta in 0.0..=FRAC_PI_2,
            a1 in 0.0..3.0f64,
            a2 in 0.0..3.0f64,
            a3 in 0.0..3.0f64,
            p in 0.0..=0.5f64,
            t in 0.0..5.0f64,
        ) {
            let cf = cfg(theta, a1, a2, a3, p, t);
            prop_assume!(spectral_params(&cf).is_ok());
            let all = closed_forms(&cf).unwrap();
            prop_assert!(all.gamma >= 0.0 && all.gamma <= 1.0 + 1e-9);
            prop_assert!(all.fid >= 0.0 && all.fid <= 1.0 + 1e-9);
            prop_assert!(all.intermediates.s1 >= 0.0);
        }

        #[test]
        fn r4_depends_on_coupling_difference(
            theta in 0.0..=FRAC_PI_2,
            a2 in 0.0..3.0f64,
            a3 in 0.0..3.0f64,
            shift in 0.0..1.0f64,
        ) {
            let cf = cfg(theta, 0.0, a2, a3, 0.1, 1.0);
            prop_assume!(spectral_params(&cf).is_ok());
            let (e, _, _) = v_blocks(&cf).unwrap();
            let shifted = cfg(theta, 0.3, a2 + shift, a3 + shift, 0.4, 1.0);
            let (e2, _, _) = v_blocks(&shifted).unwrap();
            prop_assert!((e.r4 - e2.r4).abs() < 1e-12);
            prop_assert!((r4_reduced(theta, a2 - a3, 1.0).unwrap() - e.r4).abs() < 1e-15);
        }
    }
}
