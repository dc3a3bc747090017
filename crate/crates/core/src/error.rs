use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value {0} is outside the open interval (0, 1)")]
    OutOfDomain(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("linear system is singular or ill-conditioned (relative residual {0:e})")]
    IllConditioned(f64),

    #[error("linear algebra routine failed: {0}")]
    Linalg(String),

    #[error("similarity denominator is zero")]
    ZeroDenominator,

    #[error("all paired differences are zero")]
    AllZeroDifferences,

    #[error("requested {requested} edges but only {available} are available")]
    TooManyEdges { requested: usize, available: usize },

    #[error("unknown kernel kind `{0}`")]
    UnknownKernel(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("corpus at {0} contains no documents")]
    EmptyCorpus(PathBuf),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(err: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(err.to_string())
    }
}
