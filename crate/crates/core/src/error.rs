use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, sampler and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("data error at row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("constraint region is empty: {0}")]
    EmptyRegion(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("undefined category: {0}")]
    EmptyCategory(usize),

    #[error("cannot access {}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data or schemas rather than by
    /// the caller's arguments or an internal failure.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Data(_) | Error::Row { .. } | Error::Format(_) | Error::EmptyCategory(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
