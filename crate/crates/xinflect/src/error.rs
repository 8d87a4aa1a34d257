//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by readers, trainers and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A malformed input file. `name` is the stream name given to the
    /// reader, `line` is 1-based.
    #[error("{name}:{line}: {msg}")]
    Parse {
        name: String,
        line: usize,
        msg: String,
    },

    /// The caller violated an operation precondition (empty input list,
    /// missing file, misaligned treebanks, ...).
    #[error("{0}")]
    Usage(String),

    /// Correlation is undefined for the given vectors (zero variance).
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(name: &str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            name: name.to_string(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
