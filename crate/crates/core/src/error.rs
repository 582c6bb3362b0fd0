use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("rank-deficient channel estimate at cell {cell} (reciprocal condition {rcond:.3e})")]
    RankDeficient { cell: usize, rcond: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("config file line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
