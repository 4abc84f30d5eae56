use thiserror::Error;

/// Errors raised by the geometry, map, solver and oracle layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A caller-guaranteed precondition did not hold. Kept apart from
    /// `InvalidInput` so that an inequality check can report "not applicable"
    /// instead of "violated".
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("no convergence after {steps} steps: {detail}")]
    NonConvergence { steps: usize, detail: String },

    /// The declared set distance is larger than a pair of points that was
    /// actually found.
    #[error("declared distance {declared} exceeds observed distance {observed}")]
    Declaration { declared: f64, observed: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
