use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid range: lo ({lo}) must be strictly less than hi ({hi})")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("invalid size: {what} must be at least {min}, got {got}")]
    InvalidSize {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("dimension mismatch: expected {expected} {what}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("class label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("task mismatch: {0}")]
    TaskMismatch(&'static str),

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("feature index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("evaluation set is empty")]
    EmptyEvaluationSet,

    #[error("evaluation data must be held out from model training (provenance: {got})")]
    ProvenanceViolation { got: &'static str },

    #[error("too few samples: need at least {min}, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("retention level {0}% was not part of the run")]
    UnknownRetention(u32),

    #[error("target column '{0}' not found in header")]
    MissingTarget(String),

    #[error("file has no data rows")]
    EmptyFile,

    #[error("row {row}: expected {expected} columns, got {got}")]
    InconsistentColumnCount {
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("row {row}, column '{column}': cannot parse value '{value}'")]
    MalformedValue {
        row: usize,
        column: String,
        value: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
