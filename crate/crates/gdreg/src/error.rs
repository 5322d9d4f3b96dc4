use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("label {y} is invalid for the {kind} loss")]
    InvalidLabel { kind: &'static str, y: f64 },

    #[error("the squared loss requires a label bound")]
    MissingLabelBound,

    #[error("non-finite iterate at step {t}")]
    NonFiniteIterate { t: usize },

    #[error("iterate norm {norm:.3e} exceeded the divergence guard at step {t}")]
    DivergedIterate { t: usize, norm: f64 },

    #[error("empty sequence")]
    EmptySequence,

    #[error("exhaustive enumeration refused for n = {n} (max {max})")]
    ExhaustiveTooLarge { n: usize, max: usize },

    #[error("oracle mode does not support this loss: {0}")]
    OracleMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
