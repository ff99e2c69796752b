use std::path::PathBuf;

/// Errors from dataset IO, model files and external compressors.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: no records")]
    NoRecords { path: PathBuf },

    #[error("{path}: line {line} has {found} fields, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("label column {0:?} not found")]
    MissingLabelColumn(String),

    #[error("column {column:?}: value {value:?} was not seen when the model was fitted")]
    UnseenValue { column: String, value: String },

    #[error("expected {expected} columns {names:?}, found {found}")]
    ColumnMismatch {
        expected: usize,
        found: usize,
        names: Vec<String>,
    },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("invalid model file: {0}")]
    InvalidModel(String),

    #[error("invalid ranking file {path}: {reason}")]
    InvalidRanking { path: PathBuf, reason: String },

    #[error(transparent)]
    Adapter(#[from] crate::extern_adapter::AdapterError),

    #[error(transparent)]
    Core(#[from] mdlad_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}

pub(crate) fn csv_err(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> Error {
    let path = path.into();
    move |source| Error::Csv { path, source }
}

pub(crate) fn json_err(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Error {
    let path = path.into();
    move |source| Error::Json { path, source }
}
