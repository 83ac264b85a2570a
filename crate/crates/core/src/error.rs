use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite evaluation of {what} at {at:?}")]
    Evaluation { what: String, at: Vec<f64> },

    #[error("section height must be positive, got {0}")]
    InvalidHeight(f64),

    #[error("point {point:?} violates domain requirement: {reason}")]
    Domain { point: Vec<f64>, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("point set is rank deficient (rank {rank} < {dim})")]
    RankDeficient { rank: usize, dim: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid constant: {0}")]
    InvalidConstant(String),

    #[error("no root of the ratio equation in the search bracket at {at:?}")]
    NoRoot { at: Vec<f64> },

    #[error("hypothesis failure: {0}")]
    HypothesisFailure(String),

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
