use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid generator state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot resample from an empty source dataset")]
    EmptySource,

    #[error("one-at-a-time design requires a base case")]
    MissingBaseCase,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no stored state for dgm `{dgm_id}` repetition {repetition}")]
    UnknownRepetition { dgm_id: String, repetition: u64 },

    #[error("cannot continue study: {0}")]
    CannotContinue(String),

    #[error("invalid study configuration: {0}")]
    Config(String),

    #[error("dgm grid is not a full factorial over factors {0:?}")]
    NonFactorialGrid(Vec<String>),

    #[error("need at least two methods, found {0}")]
    InsufficientMethods(usize),

    #[error("method `{method_id}` failed: {source}")]
    Fit {
        method_id: String,
        #[source]
        source: crate::estimators::FitError,
    },

    #[error("malformed input {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by the filesystem rather than by invalid input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
