//! Error type shared by all modules.
//!
//! Numeric payloads are reported as `f64` regardless of the working scalar so
//! the error type stays object-safe and non-generic.

use thiserror::Error;

/// Errors produced by constructors and numeric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("trace must be 1, got {trace:.6}")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("Bloch vector lies outside the unit ball (norm {norm:.6})")]
    OutsideBlochBall { norm: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("photon density must be non-negative, got {value:.6}")]
    NegativePhotonDensity { value: f64 },

    #[error("{what} must be positive, got {value:.6}")]
    NotPositiveParameter { what: &'static str, value: f64 },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("duration must be non-negative, got {value:.6}")]
    NegativeDuration { value: f64 },

    #[error("frequency must be non-negative, got {value:.6}")]
    NegativeFrequency { value: f64 },

    #[error("time grid must start at 0 and strictly increase")]
    InvalidGrid,

    #[error("control vector length {got} does not match grid interval count {expected}")]
    GridMismatch { expected: usize, got: usize },

    #[error("controls use a different time grid than the problem")]
    GridConflict,

    #[error("integration tail bound {bound:.3e} exceeds 1% of the integral {integral:.3e}; increase omega_max")]
    TailBound { bound: f64, integral: f64 },

    #[error("linear system is singular or too ill-conditioned to solve")]
    SingularMatrix,

    #[error("input list must be non-empty")]
    EmptyInput,

    #[error("basis and target lists have different lengths ({basis} vs {targets})")]
    BasisTargetMismatch { basis: usize, targets: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("objective became non-finite at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("Choi matrix is not completely positive (min eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("Kraus set is not trace preserving (completeness residual {residual:.3e})")]
    IncompleteKraus { residual: f64 },

    #[error("eigensolver failed to converge")]
    EigenNoConvergence,
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
