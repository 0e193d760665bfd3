use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the prediction workflow.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("non-increasing timestamps at row {row}")]
    NonIncreasingTimestamps { row: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteValue { row: usize, column: String },

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("empty partition: train fraction {train_fraction} over {samples} samples")]
    EmptyPartition { train_fraction: f64, samples: usize },

    #[error("invalid synthetic spec: {0}")]
    InvalidSynthSpec(String),

    #[error("invalid voltage bounds: {0}")]
    InvalidBounds(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("series too short: {len} samples, at least {required} required")]
    SeriesTooShort { len: usize, required: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input")]
    NonFiniteInput,

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),

    #[error("single-class truth: {positives} positives, {negatives} negatives")]
    SingleClass { positives: usize, negatives: usize },

    #[error("invalid grid step {0}")]
    InvalidGridStep(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("ragged results: {0}")]
    RaggedResults(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("missing artifact: {0}")]
    Missing(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class: 1 for configuration, 2 for data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidHyperparameter(_) | Error::InvalidGridStep(_) => 1,
            Error::InvalidBounds(_) | Error::InvalidSynthSpec(_) | Error::InvalidThreshold(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
