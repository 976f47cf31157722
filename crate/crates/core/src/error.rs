use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the pipeline.
///
/// [`Error::kind`] groups them into the coarse categories the command-line
/// driver maps onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: malformed header: expected `{expected}`, found `{found}`")]
    Header {
        path: String,
        expected: String,
        found: String,
    },

    #[error("{source_name}:{line}: {message}")]
    Row {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("duplicate key `{key}` in {source_name}")]
    DuplicateKey { source_name: String, key: String },

    #[error("data validation failed: {0}")]
    Validation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("catalog mismatch: model expects `{expected}`, features are `{found}`")]
    CatalogMismatch { expected: String, found: String },

    #[error("GCV undefined: {0}")]
    GcvUndefined(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse error category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Usage,
            Error::Invariant(_) => ErrorKind::Internal,
            Error::Io { .. } => ErrorKind::Usage,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
