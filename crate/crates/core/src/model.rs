//! Gates, Hamiltonians and initial states.
//!
//! The system is always qubit 0; environment qubits are 1..=n_env.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, z_string_diagonal, ComplexMatrix, DensityMatrix, HermitianOperator, MAX_QUBITS};

/// Which Hamiltonian composition a configuration evolves under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianVariant {
    /// Two C-INOT terms plus the three self/interaction terms (two environment qubits only).
    Eq6Full,
    /// C-INOT fan-out, single-qubit Z terms and a closed ZZ ring over the environment.
    RingEq30,
    /// C-INOT fan-out and single-qubit Z terms.
    CentralOnly,
}

impl HamiltonianVariant {
    pub fn name(self) -> &'static str {
        match self {
            HamiltonianVariant::Eq6Full => "eq6_full",
            HamiltonianVariant::RingEq30 => "ring_eq30",
            HamiltonianVariant::CentralOnly => "central_only",
        }
    }
}

impl std::str::FromStr for HamiltonianVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq6_full" => Ok(HamiltonianVariant::Eq6Full),
            "ring_eq30" => Ok(HamiltonianVariant::RingEq30),
            "central_only" => Ok(HamiltonianVariant::CentralOnly),
            other => Err(Error::arg(format!(
                "unknown Hamiltonian variant {other:?} (expected eq6_full, ring_eq30 or central_only)"
            ))),
        }
    }
}

/// Physical parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Gate imperfection in [0, π/2]; 0 is a perfect C-NOT.
    pub theta: f64,
    /// System self-evolution strength.
    pub alpha1: f64,
    /// Environment self-evolution strength.
    pub alpha2: f64,
    /// Environment interaction strength.
    pub alpha3: f64,
    /// Population of |0⟩ in each initial environment qubit, in [0, 0.5].
    pub p: f64,
    pub t: f64,
    pub n_env: usize,
    /// Environment qubits kept in the joint state; the highest-index ones are traced out.
    pub observed: usize,
    /// `None` picks `Eq6Full` for two environment qubits and `CentralOnly` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<HamiltonianVariant>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            theta: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            alpha3: 0.0,
            p: 0.0,
            t: 1.0,
            n_env: 2,
            observed: 1,
            variant: None,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2), ("alpha3", self.alpha3)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::arg(format!("{name} must be a finite value ≥ 0, got {v}")));
            }
        }
        if !(0.0..=0.5).contains(&self.p) {
            return Err(Error::arg(format!("p must lie in [0, 0.5], got {}", self.p)));
        }
        if !self.t.is_finite() {
            return Err(Error::arg(format!("t must be finite, got {}", self.t)));
        }
        if self.n_env == 0 {
            return Err(Error::arg("n_env must be at least 1"));
        }
        if self.n_env + 1 > MAX_QUBITS {
            return Err(Error::Capacity {
                qubits: self.n_env + 1,
                max: MAX_QUBITS,
            });
        }
        if self.observed == 0 || self.observed > self.n_env {
            return Err(Error::arg(format!(
                "observed must lie in 1..={}, got {}",
                self.n_env, self.observed
            )));
        }
        Ok(())
    }

    pub fn qubits(&self) -> usize {
        self.n_env + 1
    }

    pub fn resolved_variant(&self) -> HamiltonianVariant {
        self.variant.unwrap_or(if self.n_env == 2 {
            HamiltonianVariant::Eq6Full
        } else {
            HamiltonianVariant::CentralOnly
        })
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&theta) {
        Ok(())
    } else {
        Err(Error::arg(format!("theta must lie in [0, π/2], got {theta}")))
    }
}

/// The controlled imperfect-NOT gate on |control, target⟩.
pub fn cinot_unitary(theta: f64) -> Result<ComplexMatrix> {
    check_theta(theta)?;
    let (s, co) = theta.sin_cos();
    let mut u = ComplexMatrix::zeros(4, 4);
    u[(0, 0)] = c(1.0, 0.0);
    u[(1, 1)] = c(1.0, 0.0);
    u[(2, 2)] = c(s, 0.0);
    u[(2, 3)] = c(co, 0.0);
    u[(3, 2)] = c(co, 0.0);
    u[(3, 3)] = c(-s, 0.0);
    Ok(u)
}

fn cinot_lower_block(theta: f64) -> [[f64; 2]; 2] {
    let (s, co) = theta.sin_cos();
    [
        [FRAC_PI_2 * (1.0 - s), -FRAC_PI_2 * co],
        [-FRAC_PI_2 * co, FRAC_PI_2 * (1.0 + s)],
    ]
}

/// A Hamiltonian whose unit-time propagator is [`cinot_unitary`].
pub fn cinot_hamiltonian(theta: f64) -> Result<HermitianOperator> {
    check_theta(theta)?;
    let block = cinot_lower_block(theta);
    let mut h = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            h[(2 + i, 2 + j)] = c(block[i][j], 0.0);
        }
    }
    HermitianOperator::new(h)
}

/// Adds the C-INOT Hamiltonian with the system as control and `target` as
/// target, directly into an accumulator of size 2^n.
fn add_cinot_term(out: &mut ComplexMatrix, theta: f64, target: usize, n: usize) {
    let block = cinot_lower_block(theta);
    let sys_bit = 1usize << (n - 1);
    let tgt_bit = 1usize << (n - 1 - target);
    for row in 0..out.nrows() {
        if row & sys_bit == 0 {
            continue;
        }
        let r = usize::from(row & tgt_bit != 0);
        let base = row & !tgt_bit;
        for (col_t, &v) in block[r].iter().enumerate() {
            let col = base | if col_t == 1 { tgt_bit } else { 0 };
            out[(row, col)] += c(v, 0.0);
        }
    }
}

fn add_diagonal(out: &mut ComplexMatrix, diag: &[f64], weight: f64) {
    if weight == 0.0 {
        return;
    }
    for (k, &d) in diag.iter().enumerate() {
        out[(k, k)] += c(weight * d, 0.0);
    }
}

fn ensure_capacity(qubits: usize) -> Result<()> {
    if qubits > MAX_QUBITS {
        Err(Error::Capacity { qubits, max: MAX_QUBITS })
    } else {
        Ok(())
    }
}

/// The full two-environment-qubit Hamiltonian: both C-INOT terms, system and
/// environment self-evolution, and the pair plus triple ZZ interactions.
pub fn total_hamiltonian_3q(cfg: &ModelConfig) -> Result<HermitianOperator> {
    if cfg.n_env != 2 {
        return Err(Error::arg(format!(
            "the three-qubit Hamiltonian needs n_env = 2, got {}",
            cfg.n_env
        )));
    }
    check_theta(cfg.theta)?;
    let n = 3;
    let mut h = ComplexMatrix::zeros(8, 8);
    add_cinot_term(&mut h, cfg.theta, 1, n);
    add_cinot_term(&mut h, cfg.theta, 2, n);
    add_diagonal(&mut h, &z_string_diagonal(&[0], n), cfg.alpha1);
    add_diagonal(&mut h, &z_string_diagonal(&[1], n), cfg.alpha2);
    add_diagonal(&mut h, &z_string_diagonal(&[2], n), cfg.alpha2);
    for qubits in [&[0, 1][..], &[0, 2], &[1, 2], &[0, 1, 2]] {
        add_diagonal(&mut h, &z_string_diagonal(qubits, n), cfg.alpha3);
    }
    HermitianOperator::new(h)
}

/// C-INOT fan-out from the system to every environment qubit plus
/// α₂ Σ σ_Z on the environment.
pub fn central_hamiltonian_n(cfg: &ModelConfig) -> Result<HermitianOperator> {
    check_theta(cfg.theta)?;
    if cfg.n_env == 0 {
        return Err(Error::arg("n_env must be at least 1"));
    }
    let n = cfg.n_env + 1;
    ensure_capacity(n)?;
    let mut h = ComplexMatrix::zeros(1 << n, 1 << n);
    for target in 1..n {
        add_cinot_term(&mut h, cfg.theta, target, n);
        add_diagonal(&mut h, &z_string_diagonal(&[target], n), cfg.alpha2);
    }
    HermitianOperator::new(h)
}

/// Diagonal of the closed ZZ ring over the environment, including the
/// wrap-around term (so two environment qubits get their single pair twice).
pub fn ring_diagonal(n_env: usize, alpha3: f64) -> Result<Vec<f64>> {
    if n_env < 2 {
        return Err(Error::arg(format!("the ring needs at least 2 environment qubits, got {n_env}")));
    }
    let n = n_env + 1;
    ensure_capacity(n)?;
    let mut diag = vec![0.0; 1 << n];
    for i in 1..=n_env {
        let j = i % n_env + 1;
        for (acc, z) in diag.iter_mut().zip(z_string_diagonal(&[i, j], n)) {
            *acc += alpha3 * z;
        }
    }
    Ok(diag)
}

pub fn ring_hamiltonian(cfg: &ModelConfig) -> Result<HermitianOperator> {
    Ok(HermitianOperator::from_real_diagonal(&ring_diagonal(cfg.n_env, cfg.alpha3)?))
}

/// Checks that the configuration's variant can be built for it, without building it.
pub fn hamiltonian_is_defined(cfg: &ModelConfig) -> Result<()> {
    cfg.validate()?;
    match cfg.resolved_variant() {
        HamiltonianVariant::Eq6Full if cfg.n_env != 2 => Err(Error::arg(format!(
            "the eq6_full variant needs n_env = 2, got {}",
            cfg.n_env
        ))),
        HamiltonianVariant::RingEq30 if cfg.n_env < 2 => Err(Error::arg(format!(
            "the ring needs at least 2 environment qubits, got {}",
            cfg.n_env
        ))),
        HamiltonianVariant::CentralOnly if cfg.alpha3 != 0.0 => Err(Error::arg(
            "alpha3 has no term in the central_only variant; use ring_eq30 or eq6_full",
        )),
        _ => Ok(()),
    }
}

/// The Hamiltonian `cfg` evolves under, per its (resolved) variant. α₁ σ_Z on
/// the system is included in every variant.
pub fn hamiltonian(cfg: &ModelConfig) -> Result<HermitianOperator> {
    hamiltonian_is_defined(cfg)?;
    let n = cfg.qubits();
    match cfg.resolved_variant() {
        HamiltonianVariant::Eq6Full => total_hamiltonian_3q(cfg),
        variant => {
            let mut h = central_hamiltonian_n(cfg)?.into_matrix();
            add_diagonal(&mut h, &z_string_diagonal(&[0], n), cfg.alpha1);
            if variant == HamiltonianVariant::RingEq30 {
                add_diagonal(&mut h, &ring_diagonal(cfg.n_env, cfg.alpha3)?, 1.0);
            }
            HermitianOperator::new(h)
        }
    }
}

/// |+⟩⟨+| ⊗ ϱ^⊗n_env with ϱ = p|0⟩⟨0| + (1−p)|1⟩⟨1|.
pub fn initial_state(cfg: &ModelConfig) -> Result<DensityMatrix> {
    if !(0.0..=0.5).contains(&cfg.p) {
        return Err(Error::arg(format!("p must lie in [0, 0.5], got {}", cfg.p)));
    }
    let n = cfg.n_env + 1;
    ensure_capacity(n)?;
    let env_dim = 1usize << cfg.n_env;
    // diagonal of ϱ^⊗n: bit value 0 carries p, 1 carries 1 − p
    let env_diag: Vec<f64> = (0..env_dim)
        .map(|idx| {
            let ones = idx.count_ones() as i32;
            let zeros = cfg.n_env as i32 - ones;
            cfg.p.powi(zeros) * (1.0 - cfg.p).powi(ones)
        })
        .collect();
    let dim = 2 * env_dim;
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for s in 0..2 {
        for s2 in 0..2 {
            for (k, &d) in env_diag.iter().enumerate() {
                rho[(s * env_dim + k, s2 * env_dim + k)] = c(0.5 * d, 0.0);
            }
        }
    }
    Ok(DensityMatrix::trusted(rho))
}

/// The temperature reading of the environment mixedness under the
/// environment self-evolution term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalLink {
    pub alpha2: f64,
    pub p: f64,
    /// 1/β = ln((1−p)/p) / (2α₂)
    pub inv_beta: f64,
}

impl ThermalLink {
    /// p recovered from `inv_beta`: 1/(1 + e^{2α₂·inv_beta}).
    pub fn round_trip_p(&self) -> f64 {
        1.0 / (1.0 + (2.0 * self.alpha2 * self.inv_beta).exp())
    }
}

pub fn thermal_link(alpha2: f64, p: f64) -> Result<ThermalLink> {
    if alpha2 == 0.0 {
        return Err(Error::Thermal("alpha2 = 0 leaves the temperature undefined".into()));
    }
    if !(alpha2.is_finite() && alpha2 > 0.0) {
        return Err(Error::arg(format!("alpha2 must be positive, got {alpha2}")));
    }
    if p == 0.0 {
        return Err(Error::Thermal("p = 0 makes 1/β diverge".into()));
    }
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::arg(format!("p must lie in (0, 0.5], got {p}")));
    }
    Ok(ThermalLink {
        alpha2,
        p,
        inv_beta: ((1.0 - p) / p).ln() / (2.0 * alpha2),
    })
}
