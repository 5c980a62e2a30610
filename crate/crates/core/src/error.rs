use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported dataset: {0}")]
    UnsupportedDataset(String),

    #[error("line {line}: {message}")]
    Row { line: usize, message: String },

    #[error("not ready: {0}")]
    NotReady(String),

    #[error("invalid config value for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
