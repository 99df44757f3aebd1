//! Imperfect broadcasting of a qubit into a small noisy environment, and how
//! close the resulting joint states come to spectrum broadcast structure.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrices, partial traces, Hermitian exponentials,
//!   trace norms and fidelities.
//! - [`model`]: the controlled imperfect-NOT gate, the Hamiltonians built from it
//!   and the initial system–environment state.
//! - [`analytic`]: closed forms for the two-environment-qubit model.
//! - [`metrics`]: decoherence factor, fidelity bound and the optimized distance to
//!   the nearest SBS state.
//! - [`evolution`]: numerical evolution of the full register and the
//!   end-to-end [`evolution::pipeline`].
//! - [`sweep`]: parameter grids, presets and table output.

pub mod analytic;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod sweep;

pub use error::{Error, Result};
pub use evolution::{observed_joint_state, pipeline};
pub use linalg::{ComplexMatrix, DensityMatrix, HermitianOperator, C64};
pub use metrics::{ObjectivityReport, SbsCandidate};
pub use model::{HamiltonianVariant, ModelConfig};
