//! Numerical evolution of the full register and the end-to-end pipeline.

use crate::analytic;
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, partial_trace, DensityMatrix, HermitianOperator, Propagator};
use crate::metrics::{self, AnalyticComparison, ObjectivityReport, ReportOptions};
use crate::model::{self, HamiltonianVariant, ModelConfig};

/// exp(−iHt) ρ exp(iHt)
pub fn evolve(rho: &DensityMatrix, h: &HermitianOperator, t: f64) -> Result<DensityMatrix> {
    if rho.dim() != h.dim() {
        return Err(Error::arg(format!(
            "state dimension {} does not match Hamiltonian dimension {}",
            rho.dim(),
            h.dim()
        )));
    }
    let prop = Propagator::new(h, t)?;
    Ok(DensityMatrix::trusted(prop.conjugate(rho.matrix())?))
}

/// Parameters that fix the propagator; configurations that differ only in
/// `p` or `observed` share one.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PropagatorKey {
    theta: f64,
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
    t: f64,
    n_env: usize,
    variant: HamiltonianVariant,
}

impl PropagatorKey {
    fn of(cfg: &ModelConfig) -> Self {
        Self {
            theta: cfg.theta,
            alpha1: cfg.alpha1,
            alpha2: cfg.alpha2,
            alpha3: cfg.alpha3,
            t: cfg.t,
            n_env: cfg.n_env,
            variant: cfg.resolved_variant(),
        }
    }
}

/// Evolves configurations, reusing the last propagator when only the
/// initial state changes. Results are identical to the uncached path.
#[derive(Debug, Default)]
pub struct Evolver {
    cached: Option<(PropagatorKey, Propagator)>,
}

impl Evolver {
    pub fn new() -> Self {
        Self::default()
    }

    fn propagator(&mut self, cfg: &ModelConfig) -> Result<&Propagator> {
        let key = PropagatorKey::of(cfg);
        if self.cached.as_ref().is_none_or(|(k, _)| *k != key) {
            let h = model::hamiltonian(cfg)?;
            self.cached = Some((key, Propagator::new(&h, cfg.t)?));
        }
        Ok(&self.cached.as_ref().expect("populated above").1)
    }

    /// The evolved state of the whole register.
    pub fn full_state(&mut self, cfg: &ModelConfig) -> Result<DensityMatrix> {
        cfg.validate()?;
        let rho0 = model::initial_state(cfg)?;
        let prop = self.propagator(cfg)?;
        Ok(DensityMatrix::trusted(prop.conjugate(rho0.matrix())?))
    }

    /// System ⊗ the first `observed` environment qubits.
    pub fn joint_state(&mut self, cfg: &ModelConfig) -> Result<DensityMatrix> {
        let full = self.full_state(cfg)?;
        if cfg.observed == cfg.n_env {
            return Ok(full);
        }
        let keep: Vec<usize> = (0..=cfg.observed).collect();
        partial_trace(&full, cfg.qubits(), &keep)
    }

    pub fn report(&mut self, cfg: &ModelConfig, options: &ReportOptions) -> Result<ObjectivityReport> {
        let rho = self.joint_state(cfg)?;
        let mut report = metrics::report(&rho, 1 << cfg.observed, options)?;
        report.analytic = analytic_comparison(cfg, &rho, &report)?;
        Ok(report)
    }
}

/// The evolved joint state of the system and the observed environment qubits.
pub fn observed_joint_state(cfg: &ModelConfig) -> Result<DensityMatrix> {
    Evolver::new().joint_state(cfg)
}

/// Closed-form values and their deviations, when the configuration is the
/// two-environment-qubit model with one observed qubit away from the
/// closed forms' singular point.
fn analytic_comparison(
    cfg: &ModelConfig,
    rho: &DensityMatrix,
    report: &ObjectivityReport,
) -> Result<Option<AnalyticComparison>> {
    if cfg.n_env != 2 || cfg.observed != 1 || cfg.resolved_variant() != HamiltonianVariant::Eq6Full {
        return Ok(None);
    }
    let closed = match analytic::closed_forms(cfg) {
        Ok(c) => c,
        Err(Error::Singularity { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let (cond0, cond1, _, _) = metrics::conditional_states(rho, 2)?;
    let conditional_deviation = match (cond0, cond1) {
        (Some(a), Some(b)) => max_abs_diff(a.matrix(), closed.rho0.matrix()).max(max_abs_diff(b.matrix(), closed.rho1.matrix())),
        _ => f64::INFINITY,
    };
    Ok(Some(AnalyticComparison {
        gamma: closed.gamma,
        fid: closed.fid,
        mu: closed.intermediates.mu,
        nu: closed.intermediates.nu,
        thermal_dist: closed.thermal_dist,
        gamma_deviation: (report.gamma - closed.gamma).abs(),
        fid_deviation: (report.fid - closed.fid).abs(),
        thermal_deviation: report.thermal_dist.map_or(f64::INFINITY, |d| (d - closed.thermal_dist).abs()),
        conditional_deviation,
    }))
}

/// Full report for one configuration with default options (exact SBS
/// distance for qubit fragments, no basis difference).
pub fn pipeline(cfg: &ModelConfig) -> Result<ObjectivityReport> {
    pipeline_with(cfg, &ReportOptions::default())
}

pub fn pipeline_with(cfg: &ModelConfig, options: &ReportOptions) -> Result<ObjectivityReport> {
    Evolver::new().report(cfg, options)
}
