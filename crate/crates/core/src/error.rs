use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("zero variance in {0}; correlation is undefined")]
    ZeroVariance(&'static str),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("action ({a1}, {a2}) out of range for state {state}")]
    ActionOutOfRange { state: usize, a1: usize, a2: usize },

    #[error("cannot step terminal state {0}")]
    TerminalStep(usize),

    #[error("policy enumeration too large: {count} candidates exceeds limit {limit}")]
    EnumerationTooLarge { count: f64, limit: f64 },

    #[error("replay buffer is empty")]
    EmptyBuffer,

    #[error("no records to summarize")]
    EmptyRecords,

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("algorithm `{algorithm}` is not supported for experiment `{experiment}`")]
    UnsupportedAlgorithm { experiment: String, algorithm: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
