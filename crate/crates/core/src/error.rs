use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum FrameError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("invalid norm spec: {0}")]
    InvalidSpec(String),

    #[error("inadmissible norm spec: {0}")]
    InadmissibleSpec(String),

    #[error("non-finite value encountered at iteration {iteration}: {what}")]
    NonFiniteEncountered { iteration: usize, what: String },

    #[error("combinatorial budget exceeded: {count} candidates (limit {limit})")]
    CombinatorialBudgetExceeded { count: u128, limit: u128 },

    #[error("eigendecomposition failed: {0}")]
    EigenDecompositionFailure(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FrameError>;
