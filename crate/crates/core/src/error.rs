use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("memory is empty")]
    EmptyMemory,

    #[error("insufficient support: {found} neighbours, need {needed}")]
    InsufficientSupport { found: usize, needed: usize },

    #[error("competence must be <= 0, got {0}")]
    PositiveCompetence(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("reachable-set sampler efficiency {0:.2e} is below 1e-4")]
    SamplerEfficiency(f64),

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
