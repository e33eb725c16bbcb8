use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data is malformed (non-finite entries, ragged rows, bad file contents).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter is out of range or shapes do not conform.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Every Krylov generator vanished (`A X = 0`).
    #[error("empty Krylov space: A X = 0")]
    EmptyKrylov,

    /// The singular values at `index` and `index + 1` belong to the same cluster.
    #[error("no singular gap at index {index}")]
    NoGapAtIndex { index: usize },

    /// The starting guess does not satisfy the compatibility or rank hypothesis.
    #[error("starting guess is not compatible: {0}")]
    NotCompatible(String),

    /// The Krylov block has fewer independent columns than the requested rank.
    #[error("Krylov space has dimension {dim}, rank parameter {required} requested")]
    InsufficientKrylovRank { dim: usize, required: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
