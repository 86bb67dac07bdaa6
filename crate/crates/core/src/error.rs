use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum PagError {
    #[error("country index {index} out of range for a game with {n} countries")]
    CountryOutOfRange { index: usize, n: usize },

    #[error("invalid environment graph: {0}")]
    InvalidGraph(String),

    #[error("invalid strategy matrix: {0}")]
    InvalidStrategy(String),

    #[error("invalid flat allocation: {0}")]
    InvalidFlat(String),

    #[error("invalid preference order for country {country}: {reason}")]
    InvalidOrder { country: usize, reason: String },

    #[error("instance too large: {n} countries exceeds the cap of {cap}")]
    InstanceTooLarge { n: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scenario parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("report error: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, PagError>;
