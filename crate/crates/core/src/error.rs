use thiserror::Error;

/// Errors produced by code construction, encoding and simulation setup.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    InvalidLength(usize),

    #[error("invalid partition: {good} good + {semi} semipolarized channels exceed length {len}")]
    InvalidPartition { good: usize, semi: usize, len: usize },

    #[error("message length {got} does not match expected length {expected}")]
    InvalidMessageLength { expected: usize, got: usize },

    #[error("exhaustive ML decoding is limited to N <= {max}, got N = {got}")]
    OracleScale { max: usize, got: usize },

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
