use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry {value} at index {index:?}")]
    NonFinite { index: Vec<usize>, value: f64 },

    #[error("invalid tensor shape: {0}")]
    InvalidShape(String),

    #[error("tensor with {entries} dense entries exceeds the cap of {cap}")]
    TooLarge { entries: u128, cap: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("x + alpha*d vanishes; retraction undefined")]
    DegenerateRetraction,

    #[error("zero or non-finite vector cannot be normalized")]
    NotNormalizable,

    #[error("linear system is singular to working precision")]
    Singular,

    #[error("preconditioner is not symmetric positive definite at iteration {0}")]
    NotPositiveDefinite(usize),

    #[error("line search failed after {backtracks} backtracks")]
    LineSearchFailed { backtracks: usize },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
