//! Error types shared by all modules.

use thiserror::Error;

/// Errors produced by chain construction, steady-state solves, gradients,
/// optimization and statistics.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A precondition on the inputs was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Matrix or vector dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The generator's nullspace restricted to Hermitian unit-trace
    /// matrices has dimension greater than one; the steady state is not
    /// unique and a single solve is meaningless.
    #[error("degenerate steady state: nullspace dimension > 1 ({0})")]
    DegenerateSteadyState(String),

    /// A linear solve or eigen decomposition failed or produced a state
    /// violating the density-matrix tolerances.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Rank correlation is undefined (constant input has zero rank
    /// variance).
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    /// Every start of a multi-start optimization failed.
    #[error("all {failed} optimization starts failed; first error: {first}")]
    AllStartsFailed { failed: usize, first: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
