//! Time-dependent Lindblad (GKLS) master equations.
//!
//! The crate is organised bottom-up:
//!
//! * [`operator`]: dense complex operators, the Hilbert–Schmidt geometry and
//!   the Hermitian traceless basis used for the real coefficient picture.
//! * [`generator`]: time-dependent GKLS generators and their real
//!   superoperator matrix with the (M₀, b) block split.
//! * [`certifier`]: jump-set self-adjointness, commutant triviality, the
//!   spectral rate Λ(t) and the resulting relaxation verdict.
//! * [`ode`]: an adaptive Dormand–Prince 5(4) integrator with dense output.
//! * [`propagator`]: trajectories, ensembles, the asymptotic trajectory and
//!   the fundamental matrix of the traceless block.
//! * [`otto`]: the driven Ising chain Otto engine.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certifier;
pub mod generator;
pub mod ode;
pub mod operator;
pub mod otto;
pub mod propagator;
mod quadrature;
mod tolerances;

pub use quadrature::{cumulative_simpson, simpson};
pub use tolerances::Tolerances;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("superoperator entry ({row}, {col}) has imaginary residue {residue:.3e}")]
    ImaginaryResidue { row: usize, col: usize, residue: f64 },
    #[error("jump set is not self-adjoint at t = {0}")]
    NotSelfAdjoint(f64),
    #[error("time grid is not strictly increasing")]
    NonMonotoneGrid,
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("step budget exhausted at t = {0}")]
    StepBudgetExhausted(f64),
    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),
    #[error("rate evaluation failed: {0}")]
    RateEvaluation(String),
    #[error("variation-of-constants reconstruction deviates by {deviation:.3e} (threshold {threshold:.3e})")]
    ReconstructionMismatch { deviation: f64, threshold: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
