use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("operator spaces differ: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("leg {leg} out of range for {legs} legs")]
    LegOutOfRange { leg: usize, legs: usize },

    #[error("partition weight mismatch: expected {expected}, got {got}")]
    WeightMismatch { expected: usize, got: usize },

    #[error("dense dimension {dimension} exceeds cap {cap}")]
    CapExceeded { dimension: usize, cap: usize },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
