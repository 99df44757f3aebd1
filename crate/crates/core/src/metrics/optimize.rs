//! Multi-start quasi-Newton search for the nearest SBS state of a two-qubit
//! joint state.
//!
//! The full search runs over five unconstrained reals (z, x_ψ, y_ψ, x_χ, y_χ)
//! with p̃ = 0.75 − 0.25·cos z, which covers [0.5, 1] and reaches both ends at
//! finite z. The fixed-basis search freezes ψ and runs over (z, x_χ, y_χ)
//! with p̃ = (1 − cos z)/2 ∈ [0, 1].
//!
//! The trace norm Σ|λᵢ(ρ − σ)| has kinks wherever an eigenvalue crosses zero,
//! which is typically where the optimum sits, and plain quasi-Newton steps
//! stall on them several digits short of the minimum. Each start therefore
//! minimizes the smoothed norm Σ√(λᵢ² + ε²) with BFGS and analytic gradients,
//! warm-starting down an ε ladder that ends far below the reported precision.
//! Distances are always evaluated with the exact norm.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sbs::{kron2, projector, sbs_state, PureQubit, SbsCandidate};
use crate::error::{Error, Result};
use crate::linalg::{c, eigh_herm4, eigvals_herm4, trace_norm_herm4, DensityMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Seeds the randomized part of the start schedule.
    pub seed: u64,
    /// Number of multi-starts for the full search.
    pub starts: usize,
    /// BFGS iteration cap per smoothing level.
    pub max_iterations: usize,
    /// Gradient-norm convergence threshold.
    pub gradient_tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 16,
            max_iterations: 10_000,
            gradient_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SbsOptimum {
    pub distance: f64,
    pub best: SbsCandidate,
    /// Starts that ended at a stationary point or a stall rather than the iteration cap.
    pub converged_starts: usize,
}

const ARMIJO: f64 = 1e-4;
const STALL_REL: f64 = 1e-15;
const STALL_ITERS: usize = 10;
const SMOOTHING: [f64; 8] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-10];
/// Starting z is kept off the ends of the p̃ map, where ∂p̃/∂z vanishes.
const Z_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy)]
enum Family {
    /// p̃ ∈ [0.5, 1], ψ free.
    Full,
    /// p̃ ∈ [0, 1], ψ fixed to the given Bloch vector.
    Fixed([f64; 3]),
}

struct Objective {
    rho: Matrix4<C64>,
    family: Family,
}

struct Point {
    p: f64,
    dp: f64,
    psi: [f64; 3],
    dpsi: [[f64; 3]; 2],
    chi: [f64; 3],
    dchi: [[f64; 3]; 2],
}

fn bloch_with_derivatives(x: f64, y: f64) -> ([f64; 3], [[f64; 3]; 2]) {
    let (sx, cx) = x.sin_cos();
    let (sy, cy) = y.sin_cos();
    (
        [sx * cy, sx * sy, cx],
        [[cx * cy, cx * sy, -sx], [-sx * sy, sx * cy, 0.0]],
    )
}

/// ½ n·σ⃗
fn half_pauli(n: [f64; 3]) -> Matrix2<C64> {
    Matrix2::new(
        c(0.5 * n[2], 0.0),
        c(0.5 * n[0], -0.5 * n[1]),
        c(0.5 * n[0], 0.5 * n[1]),
        c(-0.5 * n[2], 0.0),
    )
}

fn neg(n: [f64; 3]) -> [f64; 3] {
    [-n[0], -n[1], -n[2]]
}

/// Re Tr(G·M) for Hermitian G and M.
fn trace_product(g: &Matrix4<C64>, m: &Matrix4<C64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += (g[(i, j)] * m[(j, i)]).re;
        }
    }
    acc
}

impl Objective {
    fn dim(&self) -> usize {
        match self.family {
            Family::Full => 5,
            Family::Fixed(_) => 3,
        }
    }

    fn point(&self, v: &[f64]) -> Point {
        match self.family {
            Family::Full => {
                let (psi, dpsi) = bloch_with_derivatives(v[1], v[2]);
                let (chi, dchi) = bloch_with_derivatives(v[3], v[4]);
                Point { p: p_full(v[0]), dp: 0.25 * v[0].sin(), psi, dpsi, chi, dchi }
            }
            Family::Fixed(psi) => {
                let (chi, dchi) = bloch_with_derivatives(v[1], v[2]);
                Point { p: p_fixed(v[0]), dp: 0.5 * v[0].sin(), psi, dpsi: [[0.0; 3]; 2], chi, dchi }
            }
        }
    }

    fn residual(&self, pt: &Point) -> Matrix4<C64> {
        self.rho - sbs_state(pt.p, pt.psi, pt.chi)
    }

    /// Exact trace-norm distance.
    fn distance(&self, v: &[f64]) -> f64 {
        trace_norm_herm4(&self.residual(&self.point(v)))
    }

    fn smoothed(&self, v: &[f64], eps: f64) -> f64 {
        eigvals_herm4(&self.residual(&self.point(v)))
            .iter()
            .map(|l| l.hypot(eps))
            .sum()
    }

    fn smoothed_with_gradient(&self, v: &[f64], eps: f64) -> (f64, DVector<f64>) {
        let pt = self.point(v);
        let (eigenvalues, eigenvectors) = eigh_herm4(&self.residual(&pt));
        let mut value = 0.0;
        // G = Σ φ'(λ) e e†, the derivative of the smoothed norm w.r.t. the residual
        let mut g = Matrix4::<C64>::zeros();
        for (k, &l) in eigenvalues.iter().enumerate() {
            let h = l.hypot(eps);
            value += h;
            let weight = if h > 0.0 { l / h } else { 0.0 };
            let e = eigenvectors.column(k);
            g += e * e.adjoint() * c(weight, 0.0);
        }
        let pa = projector(pt.psi);
        let pa_perp = projector(neg(pt.psi));
        let pb = projector(pt.chi);
        let pb_perp = projector(neg(pt.chi));
        // ∂σ/∂p̃
        let dsigma_dp = kron2(&pa, &pb) - kron2(&pa_perp, &pb_perp);
        let mix_b = pb * c(pt.p, 0.0) - pb_perp * c(1.0 - pt.p, 0.0);
        let mix_a = pa * c(pt.p, 0.0) - pa_perp * c(1.0 - pt.p, 0.0);
        // residual = ρ − σ, so every derivative carries a minus sign
        let d_psi = |dn: [f64; 3]| -trace_product(&g, &kron2(&half_pauli(dn), &mix_b));
        let d_chi = |dn: [f64; 3]| -trace_product(&g, &kron2(&mix_a, &half_pauli(dn)));
        let d_z = -trace_product(&g, &dsigma_dp) * pt.dp;
        let grad = match self.family {
            Family::Full => DVector::from_vec(vec![
                d_z,
                d_psi(pt.dpsi[0]),
                d_psi(pt.dpsi[1]),
                d_chi(pt.dchi[0]),
                d_chi(pt.dchi[1]),
            ]),
            Family::Fixed(_) => DVector::from_vec(vec![d_z, d_chi(pt.dchi[0]), d_chi(pt.dchi[1])]),
        };
        (value, grad)
    }

    fn candidate(&self, v: &[f64]) -> SbsCandidate {
        match self.family {
            Family::Full => SbsCandidate::canonical(p_full(v[0]), PureQubit::new(v[1], v[2]), PureQubit::new(v[3], v[4])),
            Family::Fixed(psi) => {
                SbsCandidate::canonical(p_fixed(v[0]), PureQubit::from_bloch(psi), PureQubit::new(v[1], v[2]))
            }
        }
    }
}

struct LocalResult {
    x: Vec<f64>,
    converged: bool,
}

/// BFGS on the ε-smoothed objective.
fn bfgs(obj: &Objective, x0: &[f64], eps: f64, settings: &OptimizerSettings) -> LocalResult {
    let n = obj.dim();
    let mut x = DVector::from_column_slice(x0);
    let (mut fx, mut g) = obj.smoothed_with_gradient(x.as_slice(), eps);
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut stalls = 0;
    for _ in 0..settings.max_iterations {
        if g.norm() < settings.gradient_tol {
            return LocalResult { x: x.as_slice().to_vec(), converged: true };
        }
        let mut d = -(&hinv * &g);
        let mut slope = g.dot(&d);
        if slope >= 0.0 {
            hinv.fill_with_identity();
            fresh = true;
            d = -g.clone();
            slope = -g.norm_squared();
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + &d * step;
            let ft = obj.smoothed(trial.as_slice(), eps);
            if ft <= fx + ARMIJO * step * slope {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(xn) = accepted else {
            if fresh {
                // no resolvable descent even along the steepest direction
                return LocalResult { x: x.as_slice().to_vec(), converged: true };
            }
            hinv.fill_with_identity();
            fresh = true;
            continue;
        };
        let (fxn, gn) = obj.smoothed_with_gradient(xn.as_slice(), eps);
        let s = &xn - &x;
        let yv = &gn - &g;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            let r = 1.0 / sy;
            let hy = &hinv * &yv;
            let yhy = yv.dot(&hy);
            hinv += (&s * s.transpose()) * (r * r * yhy + r) - (&hy * s.transpose() + &s * hy.transpose()) * r;
            fresh = false;
        }
        if fx - fxn <= STALL_REL * fx.abs().max(1.0) {
            stalls += 1;
        } else {
            stalls = 0;
        }
        x = xn;
        fx = fxn;
        g = gn;
        if stalls >= STALL_ITERS {
            return LocalResult { x: x.as_slice().to_vec(), converged: true };
        }
    }
    LocalResult { x: x.as_slice().to_vec(), converged: false }
}

/// Runs the smoothing ladder from `x0`; returns the point with the smallest
/// exact distance seen at the end of any level.
fn local_search(obj: &Objective, x0: &[f64], settings: &OptimizerSettings) -> (Vec<f64>, f64, bool) {
    let mut x = x0.to_vec();
    let mut best = (x.clone(), obj.distance(&x));
    let mut converged = true;
    for eps in SMOOTHING {
        let r = bfgs(obj, &x, eps, settings);
        converged = r.converged;
        x = r.x;
        let d = obj.distance(&x);
        if d < best.1 {
            best = (x.clone(), d);
        }
    }
    (best.0, best.1, converged)
}

fn p_full(z: f64) -> f64 {
    0.75 - 0.25 * z.cos()
}

fn z_full(p_tilde: f64) -> f64 {
    (3.0 - 4.0 * p_tilde).clamp(-1.0, 1.0).acos()
}

fn p_fixed(z: f64) -> f64 {
    0.5 * (1.0 - z.cos())
}

fn z_fixed(p_tilde: f64) -> f64 {
    (1.0 - 2.0 * p_tilde).clamp(-1.0, 1.0).acos()
}

pub(crate) fn as_static(rho: &DensityMatrix) -> Result<Matrix4<C64>> {
    if rho.dim() != 4 {
        return Err(Error::Unsupported(format!(
            "exact SBS distance is implemented for qubit⊗qubit states only (dimension 4), got dimension {}",
            rho.dim()
        )));
    }
    Ok(super::sbs::to_static4(rho.matrix()))
}

/// Bloch vector of the fragment state ⟨ψ|ρ|ψ⟩ (unnormalized reduced block),
/// and its weight.
fn conditional_fragment(rho: &Matrix4<C64>, psi: [f64; 3]) -> ([f64; 3], f64) {
    let proj = projector(psi);
    // m_{ab} = Σ_{ij} P_{ji} ρ_{ia, jb}
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    m[a][b] += proj[(j, i)] * rho[(2 * i + a, 2 * j + b)];
                }
            }
        }
    }
    let weight = m[0][0].re + m[1][1].re;
    let n = [2.0 * m[1][0].re, 2.0 * m[1][0].im, m[0][0].re - m[1][1].re];
    (n, weight)
}

fn dominant(n: [f64; 3]) -> PureQubit {
    if n.iter().map(|v| v * v).sum::<f64>() < 1e-24 {
        PureQubit::ZERO
    } else {
        PureQubit::from_bloch(n)
    }
}

fn random_qubit(rng: &mut ChaCha8Rng) -> PureQubit {
    let cos_x: f64 = rng.random_range(-1.0..1.0);
    let y: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    PureQubit::new(cos_x.acos(), y)
}

const OCTAHEDRON: [[f64; 3]; 6] = [
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
];

/// The deterministic start schedule: ψ directions over the octahedron plus
/// seeded random directions; each ψ is paired once with the heuristic χ
/// (dominant direction of ⟨ψ|ρ|ψ⟩) and once with a seeded random χ.
fn full_starts(rho: &Matrix4<C64>, settings: &OptimizerSettings) -> Vec<[f64; 5]> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let directions = settings.starts.div_ceil(2).max(1);
    let mut psis: Vec<PureQubit> = OCTAHEDRON.iter().take(directions).map(|&n| PureQubit::from_bloch(n)).collect();
    while psis.len() < directions {
        psis.push(random_qubit(&mut rng));
    }
    let mut starts = Vec::with_capacity(2 * directions);
    for psi in psis {
        let (n_chi, weight) = conditional_fragment(rho, psi.bloch());
        let (psi_h, chi_h, p_h) = if weight >= 0.5 {
            (psi, dominant(n_chi), weight)
        } else {
            let perp = psi.orthogonal();
            let (n_perp, w_perp) = conditional_fragment(rho, perp.bloch());
            (perp, dominant(n_perp), w_perp)
        };
        starts.push([clamp_z(z_full(p_h)), psi_h.x, psi_h.y, chi_h.x, chi_h.y]);
        let chi_r = random_qubit(&mut rng);
        let z_r: f64 = rng.random_range(Z_MARGIN..std::f64::consts::PI - Z_MARGIN);
        starts.push([z_r, psi.x, psi.y, chi_r.x, chi_r.y]);
    }
    starts.truncate(settings.starts.max(1));
    starts
}

fn clamp_z(z: f64) -> f64 {
    z.clamp(Z_MARGIN, std::f64::consts::PI - Z_MARGIN)
}

/// Runs every start and keeps the smallest exact distance.
fn multi_start<I: IntoIterator<Item = Vec<f64>>>(
    obj: &Objective,
    starts: I,
    settings: &OptimizerSettings,
) -> Result<SbsOptimum> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut converged = 0;
    for start in starts {
        let (x, d, ok) = local_search(obj, &start, settings);
        if !d.is_finite() {
            continue;
        }
        converged += usize::from(ok);
        if best.as_ref().is_none_or(|(_, b)| d < *b) {
            best = Some((x, d));
        }
    }
    let (x, distance) = best.ok_or_else(|| Error::numeric("optimizer produced no finite result"))?;
    let candidate = obj.candidate(&x);
    if converged == 0 {
        return Err(Error::Convergence {
            distance,
            best: Box::new(candidate),
        });
    }
    Ok(SbsOptimum {
        distance: distance.max(0.0),
        best: candidate,
        converged_starts: converged,
    })
}

/// Minimal trace-norm distance from a qubit⊗qubit state to the SBS family,
/// with the minimizing member.
pub fn optimize_sbs_distance(rho: &DensityMatrix, settings: &OptimizerSettings) -> Result<SbsOptimum> {
    let m = as_static(rho)?;
    let obj = Objective { rho: m, family: Family::Full };
    multi_start(&obj, full_starts(&m, settings).into_iter().map(|s| s.to_vec()), settings)
}

/// Local refinement from a given candidate, without the multi-start schedule.
pub fn optimize_from(rho: &DensityMatrix, start: &SbsCandidate, settings: &OptimizerSettings) -> Result<SbsOptimum> {
    let m = as_static(rho)?;
    let obj = Objective { rho: m, family: Family::Full };
    let x0 = vec![clamp_z(z_full(start.p_tilde)), start.x_psi, start.y_psi, start.x_chi, start.y_chi];
    multi_start(&obj, [x0], settings)
}

/// Minimal distance over the SBS states whose system basis is {ψ, ψ⊥}, with
/// p̃ ∈ [0, 1] and χ free.
pub fn fixed_basis_distance(rho: &DensityMatrix, psi: PureQubit, settings: &OptimizerSettings) -> Result<f64> {
    fixed_basis_optimum(rho, psi, settings).map(|o| o.distance)
}

pub fn fixed_basis_optimum(rho: &DensityMatrix, psi: PureQubit, settings: &OptimizerSettings) -> Result<SbsOptimum> {
    let m = as_static(rho)?;
    let n_psi = psi.bloch();
    let obj = Objective { rho: m, family: Family::Fixed(n_psi) };
    let (n_chi, weight) = conditional_fragment(&m, n_psi);
    let (n_perp, _) = conditional_fragment(&m, psi.orthogonal().bloch());
    let heuristic = dominant(n_chi);
    let from_perp = dominant(n_perp).orthogonal();
    let z0 = clamp_z(z_fixed(weight.clamp(0.0, 1.0)));
    let mut starts = vec![vec![z0, heuristic.x, heuristic.y], vec![z0, from_perp.x, from_perp.y]];
    for n in OCTAHEDRON {
        let q = PureQubit::from_bloch(n);
        starts.push(vec![z0, q.x, q.y]);
    }
    multi_start(&obj, starts, settings)
}

/// D(ρ, {|+⟩,|−⟩}) − D(ρ, {|0⟩,|1⟩}); positive when the computational basis
/// is closer to broadcast structure.
pub fn basis_delta(rho: &DensityMatrix, settings: &OptimizerSettings) -> Result<f64> {
    let plus = fixed_basis_distance(rho, PureQubit::PLUS, settings)?;
    let zero = fixed_basis_distance(rho, PureQubit::ZERO, settings)?;
    Ok(plus - zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron, hadamard, matmul, ComplexMatrix};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn comp_sbs() -> DensityMatrix {
        SbsCandidate::canonical(0.5, PureQubit::ZERO, PureQubit::ZERO).state()
    }

    fn random_state(seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ComplexMatrix::from_fn(4, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = &g * g.adjoint();
        let tr = crate::linalg::trace(&m).re;
        DensityMatrix::new(m / c(tr, 0.0)).unwrap()
    }

    #[test]
    fn exact_sbs_is_found() {
        let s = OptimizerSettings::default();
        let opt = optimize_sbs_distance(&comp_sbs(), &s).unwrap();
        assert!(opt.distance < 1e-9);
        assert!((opt.best.p_tilde - 0.5).abs() < 1e-6);
        assert!(opt.best.basis_alignment() > 1.0 - 1e-6);

        let tilted = SbsCandidate::canonical(0.8, PureQubit::new(1.0, 2.0), PureQubit::new(2.5, 0.3));
        let opt = optimize_sbs_distance(&tilted.state(), &s).unwrap();
        assert!(opt.distance < 1e-7, "{}", opt.distance);
        assert!((opt.best.p_tilde - 0.8).abs() < 1e-6);
    }

    #[test]
    fn fixed_basis_membership() {
        let s = OptimizerSettings::default();
        assert!(fixed_basis_distance(&comp_sbs(), PureQubit::ZERO, &s).unwrap() < 1e-9);
        assert!(fixed_basis_distance(&comp_sbs(), PureQubit::PLUS, &s).unwrap() > 1e-3);
        assert!(basis_delta(&comp_sbs(), &s).unwrap() > 0.0);

        let hh = kron(&hadamard(), &hadamard());
        let rotated = DensityMatrix::new(matmul(&matmul(&hh, comp_sbs().matrix()), &hh)).unwrap();
        assert!(basis_delta(&rotated, &s).unwrap() < 0.0);
    }

    #[test]
    fn non_qubit_fragment_is_unsupported() {
        let rho = DensityMatrix::maximally_mixed(8);
        assert!(matches!(
            optimize_sbs_distance(&rho, &OptimizerSettings::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn deterministic_and_seed_stable() {
        let rho = random_state(3);
        let s = OptimizerSettings { seed: 11, ..OptimizerSettings::default() };
        let a = optimize_sbs_distance(&rho, &s).unwrap();
        let b = optimize_sbs_distance(&rho, &s).unwrap();
        assert_eq!(a, b);
        let other = optimize_sbs_distance(&rho, &OptimizerSettings { seed: 12, ..s }).unwrap();
        assert!((other.distance - a.distance).abs() < 1e-6);
    }

    #[test]
    fn idempotent_refinement() {
        let s = OptimizerSettings::default();
        for seed in 0..5 {
            let rho = random_state(seed);
            let opt = optimize_sbs_distance(&rho, &s).unwrap();
            let again = optimize_from(&rho, &opt.best, &s).unwrap();
            assert!(opt.distance - again.distance <= 1e-8, "seed {seed}");
            assert!((opt.best.distance(&rho) - opt.distance).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_basis_dominates_full_minimum() {
        let s = OptimizerSettings::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..3 {
            let rho = random_state(100 + seed);
            let full = optimize_sbs_distance(&rho, &s).unwrap().distance;
            for _ in 0..100 {
                let psi = random_qubit(&mut rng);
                let fixed = fixed_basis_distance(&rho, psi, &s).unwrap();
                assert!(fixed >= full - 1e-6, "fixed {fixed} < full {full}");
            }
        }
    }

    #[test]
    fn local_unitaries_leave_minimum_invariant() {
        let s = OptimizerSettings::default();
        let rho = random_state(7);
        let u1 = crate::linalg::expm_hermitian(
            &crate::linalg::HermitianOperator::new(crate::linalg::pauli_y() * c(0.7, 0.0) + crate::linalg::pauli_z()).unwrap(),
            0.9,
        )
        .unwrap();
        let u2 = crate::linalg::expm_hermitian(
            &crate::linalg::HermitianOperator::new(crate::linalg::pauli_x()).unwrap(),
            0.4,
        )
        .unwrap();
        let u = kron(&u1, &u2);
        let moved = DensityMatrix::new(matmul(&matmul(&u, rho.matrix()), &u.adjoint())).unwrap();
        let a = optimize_sbs_distance(&rho, &s).unwrap().distance;
        let b = optimize_sbs_distance(&moved, &s).unwrap().distance;
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn hadamard_flips_delta() {
        let s = OptimizerSettings::default();
        let hh = kron(&hadamard(), &hadamard());
        for seed in 20..23 {
            let rho = random_state(seed);
            let flipped = DensityMatrix::new(matmul(&matmul(&hh, rho.matrix()), &hh)).unwrap();
            let d = basis_delta(&rho, &s).unwrap();
            let e = basis_delta(&flipped, &s).unwrap();
            assert!((d + e).abs() < 1e-6, "{d} vs {e}");
        }
    }

    #[test]
    fn p_tilde_maps_cover_their_ranges() {
        assert_eq!(p_full(0.0), 0.5);
        assert_eq!(p_full(PI), 1.0);
        assert!((p_full(z_full(0.83)) - 0.83).abs() < 1e-12);
        assert_eq!(p_fixed(0.0), 0.0);
        assert!((p_fixed(z_fixed(0.3)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn analytic_gradient_matches_differences() {
        let rho = as_static(&random_state(5)).unwrap();
        let objectives = [
            (Objective { rho, family: Family::Full }, vec![0.7, 1.1, 2.0, 0.4, 5.0]),
            (Objective { rho, family: Family::Fixed(PureQubit::new(FRAC_PI_2, 0.3).bloch()) }, vec![2.1, 0.9, 1.3]),
        ];
        for (obj, v) in objectives {
            let (f, g) = obj.smoothed_with_gradient(&v, 1e-2);
            assert!((f - obj.smoothed(&v, 1e-2)).abs() < 1e-14);
            for k in 0..v.len() {
                let h = 1e-6;
                let (mut up, mut down) = (v.clone(), v.clone());
                up[k] += h;
                down[k] -= h;
                let fd = (obj.smoothed(&up, 1e-2) - obj.smoothed(&down, 1e-2)) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-7, "component {k}: {fd} vs {}", g[k]);
            }
        }
    }
}
