use thiserror::Error;

use crate::metrics::SbsCandidate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad shapes, out-of-range parameters, invalid index sets.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A numerical routine failed or produced values outside its contract.
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("register of {qubits} qubits exceeds the dense capacity of {max} qubits")]
    Capacity { qubits: usize, max: usize },

    /// Closed forms divide by w² = x² + y²; they are rejected near w = 0.
    #[error("closed form is singular at w = {w:e} (θ = π/2 with α₂ = α₃ + π/2)")]
    Singularity { w: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("optimizer did not converge from any start; best distance {distance}")]
    Convergence {
        distance: f64,
        best: Box<SbsCandidate>,
    },

    /// The parameter at which the thermal relation diverges (p = 0) or is undefined (α₂ = 0).
    #[error("thermal relation undefined: {0}")]
    Thermal(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// True for errors caused by the caller rather than by numerics.
    pub fn is_argument(&self) -> bool {
        matches!(
            self,
            Error::Argument(_) | Error::Capacity { .. } | Error::Unsupported(_) | Error::Thermal(_)
        )
    }
}
