//! Dense complex linear algebra for small qubit registers.
//!
//! Qubit 0 is the leftmost (slowest) tensor factor everywhere: in `kron(a, b)`
//! the row/column index of `a` is the outer index, and in a register of `n`
//! qubits qubit `q` owns bit `n - 1 - q` of the basis index.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Max-abs deviation from the conjugate transpose tolerated for Hermitian operators.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue a density matrix (or a PSD square-root input) may carry.
pub const PSD_TOL: f64 = 1e-10;
/// Singular values below this are treated as exact zeros in trace norms.
pub const SINGULAR_FLOOR: f64 = 1e-14;
/// Eigenvalues below this are treated as exact zeros before taking square roots.
pub const SQRT_FLOOR: f64 = 1e-14;

/// Largest register the dense routines accept.
pub const MAX_QUBITS: usize = 12;

const EIGEN_MAX_ITER: usize = 10_000;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn hadamard() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)])
}

pub fn diagonal(entries: &[f64]) -> ComplexMatrix {
    let n = entries.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (k, &v) in entries.iter().enumerate() {
        m[(k, k)] = c(v, 0.0);
    }
    m
}

/// Kronecker product; the first factor's index is the slow (outer) one.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a sequence of factors, left to right.
pub fn kron_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(identity(1), |acc, f| kron(&acc, f))
}

/// `op` acting on `qubit` of an `n`-qubit register, identity elsewhere.
pub fn embed_single(op: &ComplexMatrix, qubit: usize, n: usize) -> ComplexMatrix {
    assert!(qubit < n && op.nrows() == 2 && op.ncols() == 2);
    let left = identity(1 << qubit);
    let right = identity(1 << (n - qubit - 1));
    kron(&kron(&left, op), &right)
}

/// A two-qubit operator (4×4 in the |ab⟩ basis, `a` slow) acting on qubits
/// `(first, second)` of an `n`-qubit register. The two qubits need not be
/// adjacent or ordered.
pub fn embed_pair(op: &ComplexMatrix, first: usize, second: usize, n: usize) -> ComplexMatrix {
    assert!(first < n && second < n && first != second);
    assert!(op.nrows() == 4 && op.ncols() == 4);
    let dim = 1usize << n;
    let bit = |q: usize| n - 1 - q;
    let (b1, b2) = (bit(first), bit(second));
    let mask = (1usize << b1) | (1usize << b2);
    let local = |idx: usize| (((idx >> b1) & 1) << 1) | ((idx >> b2) & 1);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for row in 0..dim {
        let rest = row & !mask;
        let lr = local(row);
        for lc in 0..4 {
            let v = op[(lr, lc)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let col = rest | (((lc >> 1) & 1) << b1) | ((lc & 1) << b2);
            out[(row, col)] = v;
        }
    }
    out
}

/// Diagonal of ⊗_{q ∈ qubits} σ_Z on an `n`-qubit register (identity elsewhere).
pub fn z_string_diagonal(qubits: &[usize], n: usize) -> Vec<f64> {
    (0..1usize << n)
        .map(|idx| {
            let ones = qubits
                .iter()
                .filter(|&&q| (idx >> (n - 1 - q)) & 1 == 1)
                .count();
            if ones % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

fn is_square(a: &ComplexMatrix) -> bool {
    a.nrows() == a.ncols() && a.nrows() > 0
}

fn is_diagonal(a: &ComplexMatrix) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == C64::new(0.0, 0.0)))
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// Complex matrix product routed through real gemm kernels for anything
/// larger than a few dozen entries.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    if a.nrows() * a.ncols() * b.ncols() <= 512 {
        return a * b;
    }
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let a_real = ai.iter().all(|&v| v == 0.0);
    let b_real = bi.iter().all(|&v| v == 0.0);
    let re = match (a_real, b_real) {
        (false, false) => &ar * &br - &ai * &bi,
        _ => &ar * &br,
    };
    let im = match (a_real, b_real) {
        (true, true) => DMatrix::zeros(a.nrows(), b.ncols()),
        (true, false) => &ar * &bi,
        (false, true) => &ai * &br,
        (false, false) => &ar * &bi + &ai * &br,
    };
    join(&re, &im)
}

fn split(a: &ComplexMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    (a.map(|z| z.re), a.map(|z| z.im))
}

fn join(re: &DMatrix<f64>, im: &DMatrix<f64>) -> ComplexMatrix {
    re.zip_map(im, C64::new)
}

/// Hermitian eigendecomposition. Real symmetric inputs take the (much
/// faster) real path. Returns eigenvalues and the eigenvector matrix.
pub fn eigh(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !is_square(a) {
        return Err(Error::arg("eigh requires a square matrix"));
    }
    let n = a.nrows();
    if a.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)].re + a[(j, i)].re));
        let eig = SymmetricEigen::try_new(real, f64::EPSILON, EIGEN_MAX_ITER)
            .ok_or_else(|| Error::numeric("real symmetric eigendecomposition did not converge"))?;
        let vecs = eig.eigenvectors.map(|v| c(v, 0.0));
        Ok((eig.eigenvalues.iter().copied().collect(), vecs))
    } else {
        let herm = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
        match SymmetricEigen::try_new(herm.clone(), f64::EPSILON, EIGEN_MAX_ITER) {
            Some(eig) if eig.eigenvalues.iter().all(|v| v.is_finite()) => {
                Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
            }
            // the complex solver occasionally breaks down on valid inputs
            _ => eigh_embedded(&herm),
        }
    }
}

/// Hermitian eigendecomposition through the real symmetric embedding
/// [[Re A, −Im A], [Im A, Re A]], whose spectrum is that of A doubled.
///
/// Each real eigenvector (u; v) gives a complex eigenvector u + iv; together
/// they form a tight frame (Σ z z† = 2I), so picking the largest residual
/// at every step always yields a full orthonormal basis.
fn eigh_embedded(herm: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = herm.nrows();
    let emb = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = herm[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = SymmetricEigen::try_new(emb, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::numeric("Hermitian eigendecomposition did not converge"))?;
    let mut candidates: Vec<(f64, nalgebra::DVector<C64>)> = (0..2 * n)
        .map(|k| {
            let col = eig.eigenvectors.column(k);
            (eig.eigenvalues[k], nalgebra::DVector::from_fn(n, |i, _| c(col[i], col[i + n])))
        })
        .collect();
    let mut values = Vec::with_capacity(n);
    let mut vectors = ComplexMatrix::zeros(n, n);
    for slot in 0..n {
        let (best, _) = candidates
            .iter()
            .enumerate()
            .map(|(k, (_, z))| (k, z.norm_squared()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let (lambda, z) = candidates.swap_remove(best);
        let z = z.normalize();
        for (_, other) in candidates.iter_mut() {
            let overlap = z.dotc(other);
            other.axpy(-overlap, &z, c(1.0, 0.0));
        }
        values.push(lambda);
        vectors.set_column(slot, &z);
    }
    Ok((values, vectors))
}

/// Eigenvalues only of a Hermitian matrix.
pub fn eigvalsh(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !is_square(a) {
        return Err(Error::arg("eigvalsh requires a square matrix"));
    }
    match a.nrows() {
        1 => Ok(vec![a[(0, 0)].re]),
        2 => {
            let m = Matrix2::new(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
            let (l0, l1) = eigvals_herm2(&m);
            Ok(vec![l0, l1])
        }
        4 => {
            let m = Matrix4::from_fn(|i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
            Ok(eigvals_herm4(&m).to_vec())
        }
        _ => eigh(a).map(|(vals, _)| vals),
    }
}

/// Closed-form eigenvalues of a 2×2 Hermitian matrix, ascending.
pub fn eigvals_herm2(m: &Matrix2<C64>) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean - radius, mean + radius)
}

/// A Hermitian operator on a (usually qubit) register.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !is_square(&matrix) {
            return Err(Error::arg(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::arg(format!(
                "matrix is not Hermitian (max |A - A†| = {defect:e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_real_diagonal(entries: &[f64]) -> Self {
        Self {
            matrix: diagonal(entries),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    pub fn plus(&self, other: &HermitianOperator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::arg(format!(
                "cannot add operators of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Commutator norm ‖[A, B]‖ (max-abs entry).
    pub fn commutator_max_abs(&self, other: &HermitianOperator) -> f64 {
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        (ab - ba).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !is_square(&matrix) {
            return Err(Error::arg(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::arg(format!(
                "density matrix is not Hermitian (max |A - A†| = {defect:e})"
            )));
        }
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::arg(format!("density matrix has trace {tr}")));
        }
        let lowest = eigvalsh(&matrix)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if lowest < -PSD_TOL {
            return Err(Error::arg(format!(
                "density matrix has negative eigenvalue {lowest:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix that is a density matrix by construction (unitary
    /// conjugation, partial trace or tensor product of valid states).
    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(is_square(&matrix));
        debug_assert!(hermiticity_defect(&matrix) < 1e-9);
        debug_assert!((trace(&matrix).re - 1.0).abs() < 1e-8);
        Self { matrix }
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) amplitude vector.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || norm == 0.0 {
            return Err(Error::arg("pure state needs a nonzero amplitude vector"));
        }
        let n = amplitudes.len();
        let m = ComplexMatrix::from_fn(n, n, |i, j| amplitudes[i] * amplitudes[j].conj() / (norm * norm));
        Ok(Self { matrix: m })
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        if probabilities.iter().any(|&p| p < -PSD_TOL) {
            return Err(Error::arg("populations must be non-negative"));
        }
        Self::new(diagonal(probabilities))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: identity(dim) / c(dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::trusted(kron(&self.matrix, &other.matrix))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigvalsh(&self.matrix)
    }
}

fn qubits_of(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

/// Reduced state on the qubits in `keep` (kept in ascending qubit order).
pub fn partial_trace(rho: &DensityMatrix, qubit_count: usize, keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace_matrix(rho.matrix(), qubit_count, keep).map(DensityMatrix::trusted)
}

/// Partial trace of an arbitrary square operator on a qubit register.
pub fn partial_trace_matrix(m: &ComplexMatrix, qubit_count: usize, keep: &[usize]) -> Result<ComplexMatrix> {
    if !is_square(m) || qubits_of(m.nrows()) != Some(qubit_count) {
        return Err(Error::arg(format!(
            "operator of dimension {} is not a {qubit_count}-qubit operator",
            m.nrows()
        )));
    }
    if keep.is_empty() {
        return Err(Error::arg("partial trace needs at least one kept qubit"));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    if kept.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::arg(format!("duplicate qubit in keep set {keep:?}")));
    }
    if let Some(&bad) = kept.iter().find(|&&q| q >= qubit_count) {
        return Err(Error::arg(format!(
            "qubit {bad} out of range for a {qubit_count}-qubit register"
        )));
    }
    let traced: Vec<usize> = (0..qubit_count).filter(|q| !kept.contains(q)).collect();
    let offsets = |qubits: &[usize]| -> Vec<usize> {
        let k = qubits.len();
        (0..1usize << k)
            .map(|local| {
                qubits.iter().enumerate().fold(0usize, |acc, (pos, &q)| {
                    let b = (local >> (k - 1 - pos)) & 1;
                    acc | (b << (qubit_count - 1 - q))
                })
            })
            .collect()
    };
    let kept_off = offsets(&kept);
    let traced_off = offsets(&traced);
    let kd = kept_off.len();
    let out = ComplexMatrix::from_fn(kd, kd, |a, b| {
        traced_off
            .iter()
            .map(|&t| m[(kept_off[a] + t, kept_off[b] + t)])
            .sum()
    });
    Ok(out)
}

/// exp(-i·scale·H), stored as independent blocks of the connected components
/// of H's sparsity pattern. Hamiltonians built from σ_Z terms and controlled
/// gates split into many small blocks, which makes the exponential and the
/// conjugation U ρ U† much cheaper than the dense route.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    phases: Vec<(usize, C64)>,
    blocks: Vec<PropagatorBlock>,
}

#[derive(Debug, Clone)]
struct PropagatorBlock {
    indices: Vec<usize>,
    unitary: ComplexMatrix,
}

impl Propagator {
    pub fn new(h: &HermitianOperator, scale: f64) -> Result<Self> {
        let m = h.matrix();
        let n = m.nrows();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != C64::new(0.0, 0.0) || m[(j, i)] != C64::new(0.0, 0.0) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = find(&mut parent, i);
            groups[r].push(i);
        }
        let mut phases = Vec::new();
        let mut blocks = Vec::new();
        for indices in groups.into_iter().filter(|g| !g.is_empty()) {
            if indices.len() == 1 {
                let i = indices[0];
                phases.push((i, (c(0.0, -scale) * m[(i, i)].re).exp()));
                continue;
            }
            let k = indices.len();
            let sub = ComplexMatrix::from_fn(k, k, |a, b| m[(indices[a], indices[b])]);
            let unitary = exp_block(&sub, scale)?;
            blocks.push(PropagatorBlock { indices, unitary });
        }
        Ok(Self { dim: n, phases, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut u = ComplexMatrix::zeros(self.dim, self.dim);
        for &(i, ph) in &self.phases {
            u[(i, i)] = ph;
        }
        for b in &self.blocks {
            for (a, &ia) in b.indices.iter().enumerate() {
                for (bb, &ib) in b.indices.iter().enumerate() {
                    u[(ia, ib)] = b.unitary[(a, bb)];
                }
            }
        }
        u
    }

    /// U · ρ · U†
    pub fn conjugate(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::arg(format!(
                "state of dimension {}x{} does not match propagator dimension {}",
                rho.nrows(),
                rho.ncols(),
                self.dim
            )));
        }
        // left multiplication: rows
        let mut w = rho.clone();
        for &(i, ph) in &self.phases {
            w.row_mut(i).iter_mut().for_each(|z| *z *= ph);
        }
        for b in &self.blocks {
            let rows = rho.select_rows(b.indices.iter());
            let prod = matmul(&b.unitary, &rows);
            for (a, &ia) in b.indices.iter().enumerate() {
                w.row_mut(ia).copy_from(&prod.row(a));
            }
        }
        // right multiplication by U†: columns
        let mut out = w.clone();
        for &(i, ph) in &self.phases {
            let cph = ph.conj();
            out.column_mut(i).iter_mut().for_each(|z| *z *= cph);
        }
        for b in &self.blocks {
            let cols = w.select_columns(b.indices.iter());
            let prod = matmul(&cols, &b.unitary.adjoint());
            for (a, &ia) in b.indices.iter().enumerate() {
                out.column_mut(ia).copy_from(&prod.column(a));
            }
        }
        Ok(out)
    }
}

fn exp_block(h: &ComplexMatrix, scale: f64) -> Result<ComplexMatrix> {
    let n = h.nrows();
    if h.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::from_fn(n, n, |i, j| 0.5 * (h[(i, j)].re + h[(j, i)].re));
        let eig = SymmetricEigen::try_new(real, f64::EPSILON, EIGEN_MAX_ITER)
            .ok_or_else(|| Error::numeric("real symmetric eigendecomposition did not converge"))?;
        let v = &eig.eigenvectors;
        let mut vc = v.clone();
        let mut vs = v.clone();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            let angle = scale * lambda;
            vc.column_mut(k).scale_mut(angle.cos());
            vs.column_mut(k).scale_mut(-angle.sin());
        }
        let vt = v.transpose();
        Ok(join(&(&vc * &vt), &(&vs * &vt)))
    } else {
        let (vals, v) = eigh(h)?;
        let mut vd = v.clone();
        for (k, &lambda) in vals.iter().enumerate() {
            let ph = (c(0.0, -scale * lambda)).exp();
            vd.column_mut(k).iter_mut().for_each(|z| *z *= ph);
        }
        Ok(matmul(&vd, &v.adjoint()))
    }
}

/// exp(-i·scale·H) through a real-eigenvalue decomposition.
pub fn expm_hermitian(h: &HermitianOperator, scale: f64) -> Result<ComplexMatrix> {
    Propagator::new(h, scale).map(|p| p.to_dense())
}

/// Eigenvalues of a 4×4 Hermitian matrix.
pub fn eigvals_herm4(m: &Matrix4<C64>) -> [f64; 4] {
    let fast = m.symmetric_eigenvalues();
    if fast.iter().all(|v| v.is_finite()) {
        return [fast[0], fast[1], fast[2], fast[3]];
    }
    let dynamic = ComplexMatrix::from_fn(4, 4, |i, j| m[(i, j)]);
    match eigh_embedded(&dynamic) {
        Ok((v, _)) => [v[0], v[1], v[2], v[3]],
        Err(_) => [f64::NAN; 4],
    }
}

/// Eigenvalues and eigenvectors (as columns) of a 4×4 Hermitian matrix.
pub fn eigh_herm4(m: &Matrix4<C64>) -> ([f64; 4], Matrix4<C64>) {
    let fast = SymmetricEigen::new(*m);
    if fast.eigenvalues.iter().all(|v| v.is_finite()) {
        let v = fast.eigenvalues;
        return ([v[0], v[1], v[2], v[3]], fast.eigenvectors);
    }
    let dynamic = ComplexMatrix::from_fn(4, 4, |i, j| m[(i, j)]);
    match eigh_embedded(&dynamic) {
        Ok((v, vecs)) => ([v[0], v[1], v[2], v[3]], Matrix4::from_fn(|i, j| vecs[(i, j)])),
        Err(_) => ([f64::NAN; 4], Matrix4::zeros()),
    }
}

/// Sum of |λ| of a 4×4 Hermitian matrix, with the trace-norm floor applied.
pub fn trace_norm_herm4(m: &Matrix4<C64>) -> f64 {
    eigvals_herm4(m)
        .iter()
        .map(|l| l.abs())
        .filter(|&l| l >= SINGULAR_FLOOR)
        .sum()
}

/// ‖A‖₁ = Tr √(A†A), the sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    if !is_square(a) {
        return Err(Error::arg(format!(
            "trace norm requires a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let values: Vec<f64> = if hermiticity_defect(a) <= 1e-14 * scale {
        eigvalsh(a)?.into_iter().map(f64::abs).collect()
    } else {
        match SVD::try_new(a.clone(), false, false, f64::EPSILON, EIGEN_MAX_ITER) {
            Some(svd) if svd.singular_values.iter().all(|v| v.is_finite()) => svd.singular_values.iter().copied().collect(),
            _ => {
                // [[0, A], [A†, 0]] has eigenvalues ±σᵢ
                let n = a.nrows();
                let dilation = ComplexMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
                    (true, false) => a[(i, j - n)],
                    (false, true) => a[(j, i - n)].conj(),
                    _ => c(0.0, 0.0),
                });
                let mut v: Vec<f64> = eigvalsh(&dilation)?.into_iter().filter(|&l| l > 0.0).collect();
                v.truncate(n);
                v
            }
        }
    };
    Ok(values.into_iter().filter(|&s| s >= SINGULAR_FLOOR).sum())
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues in [-PSD_TOL, SQRT_FLOOR) are clamped to zero; anything more
/// negative is reported as an error.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !is_square(a) {
        return Err(Error::arg("square root requires a square matrix"));
    }
    let root = |lambda: f64| -> Result<f64> {
        if lambda < -PSD_TOL {
            Err(Error::numeric(format!(
                "matrix is not positive semidefinite (eigenvalue {lambda:e})"
            )))
        } else if lambda < SQRT_FLOOR {
            Ok(0.0)
        } else {
            Ok(lambda.sqrt())
        }
    };
    if is_diagonal(a) {
        let mut out = ComplexMatrix::zeros(a.nrows(), a.ncols());
        for i in 0..a.nrows() {
            out[(i, i)] = c(root(a[(i, i)].re)?, 0.0);
        }
        return Ok(out);
    }
    let (vals, v) = eigh(a)?;
    let mut vd = v.clone();
    for (k, &lambda) in vals.iter().enumerate() {
        let r = root(lambda)?;
        vd.column_mut(k).iter_mut().for_each(|z| *z *= r);
    }
    Ok(matmul(&vd, &v.adjoint()))
}

/// Fidelity Tr √(√ρ₀ ρ₁ √ρ₀), evaluated as ‖√ρ₀ √ρ₁‖₁ so that rank-deficient
/// inputs do not pick up square roots of rounding noise.
pub fn fidelity(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    fidelity_of(rho0.matrix(), rho1.matrix())
}

pub(crate) fn fidelity_of(rho0: &ComplexMatrix, rho1: &ComplexMatrix) -> Result<f64> {
    if rho0.shape() != rho1.shape() {
        return Err(Error::arg(format!(
            "fidelity of states with dimensions {} and {}",
            rho0.nrows(),
            rho1.nrows()
        )));
    }
    match rho0.nrows() {
        // F² = Tr(ρ₀ρ₁) + 2√(det ρ₀ · det ρ₁) for qubits
        2 => {
            let det = |m: &ComplexMatrix| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
            let overlap = trace(&(rho0 * rho1)).re;
            Ok((overlap + 2.0 * (det(rho0) * det(rho1)).sqrt()).max(0.0).sqrt())
        }
        n if n > 4 && (is_diagonal(rho0) || is_diagonal(rho1)) => {
            // √D ρ √D is cheap for diagonal D and only needs eigenvalues
            let (d, other) = if is_diagonal(rho0) { (rho0, rho1) } else { (rho1, rho0) };
            let roots: Vec<f64> = (0..n).map(|i| d[(i, i)].re.max(0.0).sqrt()).collect();
            let m = ComplexMatrix::from_fn(n, n, |i, j| other[(i, j)] * (roots[i] * roots[j]));
            let mut total = 0.0;
            for lambda in eigvalsh(&m)? {
                if lambda < -PSD_TOL {
                    return Err(Error::numeric(format!("fidelity operator has eigenvalue {lambda:e}")));
                }
                if lambda >= SQRT_FLOOR {
                    total += lambda.sqrt();
                }
            }
            Ok(total)
        }
        _ => {
            let s0 = psd_sqrt(rho0)?;
            let s1 = psd_sqrt(rho1)?;
            trace_norm(&matmul(&s0, &s1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.shape() == b.shape() && max_abs_diff(a, b) < tol
    }

    #[test]
    fn kron_identity_and_z() {
        assert!(approx_eq(&kron(&identity(2), &identity(2)), &identity(4), 0.0 + 1e-15));
        let zi = kron(&pauli_z(), &identity(2));
        assert!(approx_eq(&zi, &diagonal(&[1., 1., -1., -1.]), 1e-15));
        let zz = kron(&pauli_z(), &pauli_z());
        assert!(approx_eq(&zz, &diagonal(&[1., -1., -1., 1.]), 1e-15));
    }

    #[test]
    fn embed_pair_matches_kron_for_adjacent_and_reversed_qubits() {
        let op = kron(&pauli_x(), &pauli_z());
        let direct = kron(&op, &identity(2));
        assert!(approx_eq(&embed_pair(&op, 0, 1, 3), &direct, 1e-15));
        // reversed order: Z on qubit 0, X on qubit 1
        let rev = embed_pair(&op, 1, 0, 2);
        assert!(approx_eq(&rev, &kron(&pauli_z(), &pauli_x()), 1e-15));
        // non-adjacent
        let far = embed_pair(&op, 0, 2, 3);
        let expected = kron(&kron(&pauli_x(), &identity(2)), &pauli_z());
        assert!(approx_eq(&far, &expected, 1e-15));
    }

    #[test]
    fn z_string_diagonal_matches_kron() {
        let d = z_string_diagonal(&[0, 2], 3);
        let expected = kron(&kron(&pauli_z(), &identity(2)), &pauli_z());
        assert!(approx_eq(&diagonal(&d), &expected, 1e-15));
    }

    #[test]
    fn partial_trace_product_and_ghz() {
        let a = DensityMatrix::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.7, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.)],
        ))
        .unwrap();
        let b = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        let ab = a.tensor(&b);
        let ra = partial_trace(&ab, 2, &[0]).unwrap();
        assert!(approx_eq(ra.matrix(), a.matrix(), 1e-15));
        let rb = partial_trace(&ab, 2, &[1]).unwrap();
        assert!(approx_eq(rb.matrix(), b.matrix(), 1e-15));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut ghz = vec![c(0., 0.); 8];
        ghz[0] = c(s, 0.);
        ghz[7] = c(s, 0.);
        let ghz = DensityMatrix::pure(&ghz).unwrap();
        let r = partial_trace(&ghz, 3, &[0, 1]).unwrap();
        assert!(approx_eq(r.matrix(), &diagonal(&[0.5, 0., 0., 0.5]), 1e-15));
        assert!((r.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_rejects_bad_index_sets() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(partial_trace(&rho, 2, &[]).is_err());
        assert!(partial_trace(&rho, 2, &[2]).is_err());
        assert!(partial_trace(&rho, 2, &[0, 0]).is_err());
        assert!(partial_trace(&rho, 3, &[0]).is_err());
    }

    #[test]
    fn partial_trace_keeps_non_contiguous_qubits_in_order() {
        // |0⟩|1⟩|+⟩ : keep qubits {0, 2}
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c(0., 0.); 8];
        amps[0b010] = c(s, 0.);
        amps[0b011] = c(s, 0.);
        let rho = DensityMatrix::pure(&amps).unwrap();
        let r = partial_trace(&rho, 3, &[2, 0]).unwrap();
        let expected = kron(
            &diagonal(&[1., 0.]),
            &ComplexMatrix::from_element(2, 2, c(0.5, 0.)),
        );
        assert!(approx_eq(r.matrix(), &expected, 1e-15));
    }

    #[test]
    fn expm_zero_scale_and_diagonal() {
        let h = HermitianOperator::new(kron(&pauli_x(), &pauli_z())).unwrap();
        assert!(approx_eq(&expm_hermitian(&h, 0.0).unwrap(), &identity(4), 1e-15));
        let d = HermitianOperator::from_real_diagonal(&[0.0, PI]);
        let u = expm_hermitian(&d, 1.0).unwrap();
        assert!(approx_eq(&u, &diagonal(&[1.0, -1.0]), 1e-15));
    }

    #[test]
    fn expm_complex_hermitian_matches_pauli_rotation() {
        // exp(-i a σ_Y) = cos a · I - i sin a · σ_Y
        let a = 0.37;
        let h = HermitianOperator::new(pauli_y()).unwrap();
        let u = expm_hermitian(&h, a).unwrap();
        let expected = identity(2) * c(a.cos(), 0.) - pauli_y() * c(0., a.sin());
        assert!(approx_eq(&u, &expected, 1e-14));
    }

    #[test]
    fn propagator_conjugation_matches_dense() {
        let h = HermitianOperator::new(
            kron(&pauli_x(), &identity(2)) + kron(&pauli_z(), &pauli_z()) * c(0.3, 0.)
                + kron(&identity(2), &pauli_y()) * c(0.2, 0.),
        )
        .unwrap();
        let prop = Propagator::new(&h, 0.8).unwrap();
        let u = prop.to_dense();
        let rho = DensityMatrix::pure(&[c(0.5, 0.1), c(0.2, -0.3), c(0.1, 0.), c(0.4, 0.4)]).unwrap();
        let via_blocks = prop.conjugate(rho.matrix()).unwrap();
        let dense = &u * rho.matrix() * u.adjoint();
        assert!(approx_eq(&via_blocks, &dense, 1e-14));
    }

    #[test]
    fn matmul_matches_naive_product() {
        let a = ComplexMatrix::from_fn(7, 9, |i, j| c((i * j) as f64 * 0.1 - 0.3, (i + j) as f64 * 0.05));
        let b = ComplexMatrix::from_fn(9, 11, |i, j| c((i as f64 - j as f64) * 0.07, 0.2 * i as f64));
        assert!(approx_eq(&matmul(&a, &b), &(&a * &b), 1e-13));
        let br = b.map(|z| c(z.re, 0.0));
        assert!(approx_eq(&matmul(&a, &br), &(&a * &br), 1e-13));
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&diagonal(&[1.0, -1.0])).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
        let rho = DensityMatrix::pure(&[c(0.3, 0.1), c(0.2, 0.9), c(-0.4, 0.0)]).unwrap();
        assert!((trace_norm(rho.matrix()).unwrap() - 1.0).abs() < 1e-12);
        // non-Hermitian: singular values of [[0, 2], [0, 0]] are (2, 0)
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(2., 0.), c(0., 0.), c(0., 0.)]);
        assert!((trace_norm(&m).unwrap() - 2.0).abs() < 1e-14);
        assert!(trace_norm(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let rho = DensityMatrix::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.6, 0.), c(0.1, 0.3), c(0.1, -0.3), c(0.4, 0.)],
        ))
        .unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-12);
        let zero = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let one = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-15);
        let (p, q) = (0.3, 0.8);
        let f = fidelity(
            &DensityMatrix::diagonal(&[p, 1.0 - p]).unwrap(),
            &DensityMatrix::diagonal(&[q, 1.0 - q]).unwrap(),
        )
        .unwrap();
        assert!((f - ((p * q).sqrt() + ((1.0 - p) * (1.0 - q)).sqrt())).abs() < 1e-14);
        assert!(fidelity(&zero, &DensityMatrix::maximally_mixed(4)).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(diagonal(&[0.5, 0.6])).is_err());
        assert!(DensityMatrix::new(diagonal(&[1.2, -0.2])).is_err());
        let non_herm = ComplexMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.1, 0.), c(0.2, 0.), c(0.5, 0.)]);
        assert!(DensityMatrix::new(non_herm).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::zeros(2, 3)).is_err());
        assert!(DensityMatrix::new(diagonal(&[0.5, 0.5])).is_ok());
    }

    #[test]
    fn psd_sqrt_rejects_indefinite_input() {
        assert!(psd_sqrt(&diagonal(&[0.5, -0.1])).is_err());
        let tiny_negative = diagonal(&[1.0, -1e-12]);
        let r = psd_sqrt(&tiny_negative).unwrap();
        assert_eq!(r[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn embedded_eigh_handles_degenerate_spectra() {
        let u = expm_hermitian(
            &HermitianOperator::new(ComplexMatrix::from_fn(6, 6, |i, j| {
                let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
                if i == j { c(lo, 0.0) } else if i < j { c(0.3 * lo, 0.1 * hi) } else { c(0.3 * lo, -0.1 * hi) }
            }))
            .unwrap(),
            1.0,
        )
        .unwrap();
        let a = &u * diagonal(&[1.0, 1.0, 2.0, 2.0, 2.0, -3.0]) * u.adjoint();
        let (vals, vecs) = eigh_embedded(&a).unwrap();
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        for (v, e) in sorted.iter().zip([-3.0, 1.0, 1.0, 2.0, 2.0, 2.0]) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!(max_abs_diff(&(vecs.adjoint() * &vecs), &identity(6)) < 1e-12);
        assert!(max_abs_diff(&(&a * &vecs), &(&vecs * diagonal(&vals))) < 1e-12);
    }
}
