use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    /// The message already includes the inner error, so it is not chained
    /// again as a source.
    #[error("{}: {cause}", path.display())]
    File { path: PathBuf, cause: Box<Error> },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{skipped} of {total} lines malformed; this does not look like a {format} file")]
    MostlyMalformed {
        format: &'static str,
        skipped: usize,
        total: usize,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("undefined: {0}")]
    Undefined(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// Attach the path of the file that produced this error.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            cause: Box::new(self),
        }
    }
}
