use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed file structure. `line` is 1-based when known.
    #[error("format error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Format { line: Option<u64>, message: String },

    #[error("value error at row {row}, column {col}: {message}")]
    Value {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("length error: {0}")]
    Length(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("stratification error: class '{class}' has {count} rows, {message}")]
    Stratification {
        class: String,
        count: usize,
        message: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape error: expected {expected} columns, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(message: impl Into<String>) -> Self {
        Error::Format {
            line: None,
            message: message.into(),
        }
    }

    pub(crate) fn format_at(line: u64, message: impl Into<String>) -> Self {
        Error::Format {
            line: Some(line),
            message: message.into(),
        }
    }
}
