use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),
    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig { field: &'static str, message: String },
    #[error("search space exhausted")]
    SearchSpaceExhausted,
    #[error("selection pool of {0} cannot form a pair of distinct parents")]
    PoolTooSmall(usize),
    #[error("history needs at least 2 distinct individuals, found {0}")]
    InsufficientHistory(usize),
    #[error("fitness must be finite and nonnegative, got {0}")]
    InvalidFitness(f64),
    #[error("expected {expected} fitness values, got {got}")]
    BatchSizeMismatch { expected: usize, got: usize },
    #[error("{0}")]
    StateConflict(&'static str),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl Error {
    pub(crate) fn config(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidConfig { field, message: message.into() }
    }
}
