use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("exhaustive mode unavailable for degree {degree} (cap {cap})")]
    ExhaustiveUnavailable { degree: usize, cap: usize },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid use: {0}")]
    InvalidUse(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
