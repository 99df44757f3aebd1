//! The two-qubit SBS family p̃·Pψ⊗Pχ + (1−p̃)·Pψ⊥⊗Pχ⊥ and fast trace-norm
//! distances to it.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::linalg::{c, trace_norm_herm4, ComplexMatrix, DensityMatrix, C64};

/// Tolerance within which a polar angle counts as a pole, where the azimuth is gauge.
const POLE_TOL: f64 = 1e-9;

/// A pure qubit state given by its Bloch angles:
/// cos(x/2)|0⟩ + e^{iy} sin(x/2)|1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureQubit {
    pub x: f64,
    pub y: f64,
}

impl PureQubit {
    pub const ZERO: PureQubit = PureQubit { x: 0.0, y: 0.0 };
    pub const ONE: PureQubit = PureQubit { x: std::f64::consts::PI, y: 0.0 };
    pub const PLUS: PureQubit = PureQubit { x: std::f64::consts::FRAC_PI_2, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_bloch(n: [f64; 3]) -> Self {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if norm == 0.0 {
            return Self::ZERO;
        }
        let x = (n[2] / norm).clamp(-1.0, 1.0).acos();
        let y = if x < POLE_TOL || std::f64::consts::PI - x < POLE_TOL {
            0.0
        } else {
            n[1].atan2(n[0]).rem_euclid(std::f64::consts::TAU)
        };
        Self { x, y }
    }

    pub fn bloch(&self) -> [f64; 3] {
        let (sx, cx) = self.x.sin_cos();
        let (sy, cy) = self.y.sin_cos();
        [sx * cy, sx * sy, cx]
    }

    pub fn orthogonal(&self) -> Self {
        let n = self.bloch();
        Self::from_bloch([-n[0], -n[1], -n[2]])
    }

    /// Canonical angles: x ∈ [0, π], y ∈ [0, 2π), y = 0 at the poles.
    pub fn canonical(&self) -> Self {
        Self::from_bloch(self.bloch())
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        let (s, co) = (0.5 * self.x).sin_cos();
        [c(co, 0.0), C64::from_polar(s, self.y)]
    }

    pub fn projector(&self) -> Matrix2<C64> {
        projector(self.bloch())
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::trusted(to_dynamic2(&self.projector()))
    }
}

/// ½(I + n·σ)
pub(crate) fn projector(n: [f64; 3]) -> Matrix2<C64> {
    Matrix2::new(
        c(0.5 * (1.0 + n[2]), 0.0),
        c(0.5 * n[0], -0.5 * n[1]),
        c(0.5 * n[0], 0.5 * n[1]),
        c(0.5 * (1.0 - n[2]), 0.0),
    )
}

pub(crate) fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

pub(crate) fn to_dynamic2(m: &Matrix2<C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

pub(crate) fn to_dynamic4(m: &Matrix4<C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

pub(crate) fn to_static4(m: &ComplexMatrix) -> Matrix4<C64> {
    Matrix4::from_fn(|i, j| m[(i, j)])
}

/// p̃·Pψ⊗Pχ + (1−p̃)·Pψ⊥⊗Pχ⊥ from Bloch vectors.
pub(crate) fn sbs_state(p_tilde: f64, psi: [f64; 3], chi: [f64; 3]) -> Matrix4<C64> {
    let neg = |n: [f64; 3]| [-n[0], -n[1], -n[2]];
    let a = kron2(&projector(psi), &projector(chi));
    let b = kron2(&projector(neg(psi)), &projector(neg(chi)));
    a * c(p_tilde, 0.0) + b * c(1.0 - p_tilde, 0.0)
}

pub(crate) fn distance_to(rho: &Matrix4<C64>, p_tilde: f64, psi: [f64; 3], chi: [f64; 3]) -> f64 {
    trace_norm_herm4(&(rho - sbs_state(p_tilde, psi, chi)))
}

/// A member of the SBS family, in canonical form: p̃ ∈ [0.5, 1] and Bloch
/// angles x ∈ [0, π], y ∈ [0, 2π) (y = 0 when x is at a pole).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbsCandidate {
    pub p_tilde: f64,
    pub x_psi: f64,
    pub y_psi: f64,
    pub x_chi: f64,
    pub y_chi: f64,
}

impl SbsCandidate {
    /// Canonicalizes an arbitrary (p̃, ψ, χ), with p̃ ∈ [0, 1], by swapping to
    /// the orthogonal pair when p̃ < 0.5.
    pub fn canonical(p_tilde: f64, psi: PureQubit, chi: PureQubit) -> Self {
        let (p, psi, chi) = if p_tilde < 0.5 {
            (1.0 - p_tilde, psi.orthogonal(), chi.orthogonal())
        } else {
            (p_tilde, psi.canonical(), chi.canonical())
        };
        Self {
            p_tilde: p.min(1.0),
            x_psi: psi.x,
            y_psi: psi.y,
            x_chi: chi.x,
            y_chi: chi.y,
        }
    }

    pub fn psi(&self) -> PureQubit {
        PureQubit::new(self.x_psi, self.y_psi)
    }

    pub fn chi(&self) -> PureQubit {
        PureQubit::new(self.x_chi, self.y_chi)
    }

    /// Fragment state paired with |ψ⟩.
    pub fn env_state_0(&self) -> DensityMatrix {
        self.chi().density()
    }

    /// Fragment state paired with |ψ⊥⟩.
    pub fn env_state_1(&self) -> DensityMatrix {
        self.chi().orthogonal().density()
    }

    /// max(cos(x_ψ/2), sin(x_ψ/2)): 1 for the computational basis, 1/√2 for
    /// bases on the equator.
    pub fn basis_alignment(&self) -> f64 {
        let (s, c) = (0.5 * self.x_psi).sin_cos();
        s.max(c)
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::trusted(to_dynamic4(&sbs_state(
            self.p_tilde,
            self.psi().bloch(),
            self.chi().bloch(),
        )))
    }

    /// Trace-norm distance from `rho` (a 4×4 joint state).
    pub fn distance(&self, rho: &DensityMatrix) -> f64 {
        distance_to(&to_static4(rho.matrix()), self.p_tilde, self.psi().bloch(), self.chi().bloch())
    }
}
