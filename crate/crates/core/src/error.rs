use alloc::string::String;

/// Errors raised by the codelength models, learners and metrics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("unknown category {value} (arity {arity})")]
    UnknownCategory { value: u32, arity: u32 },

    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(&'static str),

    #[error("arity mismatch: expected {expected} values, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("ragged rows: row {row} has {found} values, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("zero-probability value under MLE (column {column}, value {value})")]
    ZeroProbability { column: usize, value: u32 },

    #[error("k = {k} exceeds the number of records ({n})")]
    TooManyClasses { k: usize, n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("AUC undefined: both anomalies and normal records are required")]
    AucUndefined,

    #[error("nDCG undefined: at least one anomaly is required")]
    NdcgUndefined,

    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },

    /// A failure inside a base model that lives outside this crate
    /// (for example an external compressor process).
    #[error("base model: {0}")]
    Backend(String),
}

pub type Result<T> = core::result::Result<T, Error>;
