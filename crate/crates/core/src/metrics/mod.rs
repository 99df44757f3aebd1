//! Objectivity diagnostics of a system-qubit ⊗ fragment joint state.
//!
//! The joint state is split into 2×2 blocks over the system's computational
//! basis: ρ = [[ρ₀₀, ρ₀₁], [ρ₁₀, ρ₁₁]]. The decoherence factor is ‖2ρ₀₁‖₁
//! (1 for an undecohered |+⟩ system), the branch probabilities are Tr ρᵢᵢ and
//! the conditional fragment states are ρᵢᵢ/cᵢ.

mod optimize;
mod sbs;

use serde::Serialize;

pub use optimize::{
    basis_delta, fixed_basis_distance, fixed_basis_optimum, optimize_from, optimize_sbs_distance, OptimizerSettings,
    SbsOptimum,
};
pub use sbs::{PureQubit, SbsCandidate};

use crate::error::{Error, Result};
use crate::linalg::{fidelity_of, trace, trace_norm, ComplexMatrix, DensityMatrix};

/// Branch probabilities below this leave the conditional state undefined;
/// the fidelity is then reported as 0.
const EMPTY_BRANCH: f64 = 1e-12;

/// Deviations between the numerically evolved report and the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticComparison {
    pub gamma: f64,
    pub fid: f64,
    pub mu: f64,
    pub nu: f64,
    pub thermal_dist: f64,
    pub gamma_deviation: f64,
    pub fid_deviation: f64,
    pub thermal_deviation: f64,
    /// Max-abs entry difference of the conditional states.
    pub conditional_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectivityReport {
    pub gamma: f64,
    pub c0: f64,
    pub c1: f64,
    pub fid: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// 2(Γ + √(c₀c₁)·F), an upper bound on the distance to the nearest SBS state.
    pub upper_bound: f64,
    /// Exact minimal distance; qubit fragments only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sbs_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal: Option<SbsCandidate>,
    /// Trace distance of the fragment marginal from the nearest diagonal state; qubit fragments only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermal_dist: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<AnalyticComparison>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Run the exact SBS-distance optimization (qubit fragments only).
    pub optimize: bool,
    /// Compute the Hadamard-versus-computational basis difference (qubit fragments only).
    pub delta: bool,
    pub optimizer: OptimizerSettings,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            optimize: true,
            delta: false,
            optimizer: OptimizerSettings::default(),
        }
    }
}

/// The blocks of a system-qubit ⊗ fragment state.
pub struct SystemBlocks {
    pub rho00: ComplexMatrix,
    pub rho01: ComplexMatrix,
    pub rho11: ComplexMatrix,
}

pub fn system_blocks(rho: &DensityMatrix, fragment_dim: usize) -> Result<SystemBlocks> {
    if fragment_dim == 0 || rho.dim() != 2 * fragment_dim {
        return Err(Error::arg(format!(
            "joint state of dimension {} is not a qubit times a {fragment_dim}-dimensional fragment",
            rho.dim()
        )));
    }
    let m = rho.matrix();
    let f = fragment_dim;
    Ok(SystemBlocks {
        rho00: m.view((0, 0), (f, f)).into_owned(),
        rho01: m.view((0, f), (f, f)).into_owned(),
        rho11: m.view((f, f), (f, f)).into_owned(),
    })
}

/// Γ = ‖2ρ₀₁‖₁.
pub fn decoherence_factor(rho: &DensityMatrix, fragment_dim: usize) -> Result<f64> {
    let blocks = system_blocks(rho, fragment_dim)?;
    trace_norm(&(blocks.rho01 * crate::linalg::c(2.0, 0.0)))
}

pub fn sbs_upper_bound(gamma: f64, c0: f64, c1: f64, fid: f64) -> f64 {
    2.0 * (gamma + (c0 * c1).max(0.0).sqrt() * fid)
}

/// Normalized conditional fragment states, or `None` for a branch with
/// (numerically) zero weight.
pub fn conditional_states(
    rho: &DensityMatrix,
    fragment_dim: usize,
) -> Result<(Option<DensityMatrix>, Option<DensityMatrix>, f64, f64)> {
    let blocks = system_blocks(rho, fragment_dim)?;
    let c0 = trace(&blocks.rho00).re;
    let c1 = trace(&blocks.rho11).re;
    let norm = |m: ComplexMatrix, w: f64| {
        (w >= EMPTY_BRANCH).then(|| DensityMatrix::trusted(m / crate::linalg::c(w, 0.0)))
    };
    Ok((norm(blocks.rho00, c0), norm(blocks.rho11, c1), c0, c1))
}

/// (μ, ν) with √ϱ₀ ϱ₁ √ϱ₀ having eigenvalues μ ± ν, for qubit conditional states.
/// ν comes from the eigenvalue spread rather than √(μ² − det ϱ₀ det ϱ₁), which
/// loses half the digits when the states nearly coincide.
fn mu_nu(rho0: &ComplexMatrix, rho1: &ComplexMatrix) -> (f64, f64) {
    let det = (rho0[(0, 0)] * rho0[(1, 1)] - rho0[(0, 1)] * rho0[(1, 0)]).re.max(0.0).sqrt();
    let norm = (trace(rho0).re + 2.0 * det).max(0.0).sqrt();
    // √A = (A + √det A · I) / √(Tr A + 2√det A) for a 2×2 positive A
    let root = if norm > 0.0 {
        (rho0 + ComplexMatrix::identity(2, 2) * crate::linalg::c(det, 0.0)) / crate::linalg::c(norm, 0.0)
    } else {
        ComplexMatrix::zeros(2, 2)
    };
    let m = &root * rho1 * &root;
    let mu = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let nu = 0.5 * ((m[(0, 0)].re - m[(1, 1)].re).powi(2) + 4.0 * m[(0, 1)].norm_sqr()).sqrt();
    (mu, nu)
}

/// ‖τ − diag τ‖₁ = 2|τ₀₁| for the qubit fragment marginal τ = ρ₀₀ + ρ₁₁.
fn thermal_distance_of(blocks: &SystemBlocks) -> f64 {
    let tau01 = blocks.rho00[(0, 1)] + blocks.rho11[(0, 1)];
    2.0 * tau01.norm()
}

pub fn report(rho: &DensityMatrix, fragment_dim: usize, options: &ReportOptions) -> Result<ObjectivityReport> {
    let blocks = system_blocks(rho, fragment_dim)?;
    // + 0.0 turns a -0.0 sum into 0.0
    let gamma = trace_norm(&(&blocks.rho01 * crate::linalg::c(2.0, 0.0)))? + 0.0;
    let (cond0, cond1, c0, c1) = conditional_states(rho, fragment_dim)?;
    let qubit = fragment_dim == 2;
    let (fid, mu, nu) = match (&cond0, &cond1) {
        (Some(r0), Some(r1)) => {
            let fid = fidelity_of(r0.matrix(), r1.matrix())?;
            if qubit {
                let (mu, nu) = mu_nu(r0.matrix(), r1.matrix());
                (fid, Some(mu), Some(nu))
            } else {
                (fid, None, None)
            }
        }
        _ => (0.0, None, None),
    };
    let upper_bound = sbs_upper_bound(gamma, c0, c1, fid);
    let thermal_dist = qubit.then(|| thermal_distance_of(&blocks));
    let (sbs_distance, optimal) = if qubit && options.optimize {
        let opt = optimize_sbs_distance(rho, &options.optimizer)?;
        (Some(opt.distance), Some(opt.best))
    } else {
        (None, None)
    };
    let delta = if qubit && options.delta {
        Some(basis_delta(rho, &options.optimizer)?)
    } else {
        None
    };
    Ok(ObjectivityReport {
        gamma,
        c0,
        c1,
        fid,
        mu,
        nu,
        upper_bound,
        sbs_distance,
        optimal,
        thermal_dist,
        delta,
        analytic: None,
    })
}
