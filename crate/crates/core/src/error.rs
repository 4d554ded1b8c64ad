use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A required input file could not be opened or read.
    #[error("failed to load {path}: {source}")]
    Load {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Parsed input violates a data invariant. `row` is 1-based and counts
    /// the header as row 1.
    #[error("{file}, row {row}: {message}")]
    Validation {
        file: String,
        row: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("metric is undefined: {0}")]
    UndefinedMetric(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn validation(file: &str, row: usize, msg: impl Into<String>) -> Self {
        Error::Validation {
            file: file.to_string(),
            row,
            message: msg.into(),
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::Argument(_) | Error::Parse { .. } => 2,
            Error::Numeric(_) | Error::UndefinedMetric(_) => 3,
            Error::Load { .. } | Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}
