//! Crate-wide error type and process exit-code mapping.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("duplicate date {0}")]
    DuplicateDate(chrono::NaiveDate),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("feature unavailable: {0}")]
    FeatureUnavailable(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("fit failure: {0}")]
    FitFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 0 success, 2 i/o, 3 validation, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::InsufficientData(_)
            | Error::DuplicateDate(_)
            | Error::Contract(_)
            | Error::FeatureUnavailable(_)
            | Error::Config(_) => 3,
            Error::Domain(_) | Error::Degenerate(_) | Error::FitFailure(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
