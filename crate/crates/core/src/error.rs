use std::path::PathBuf;

use thiserror::Error;

use crate::pwl_fit::FitOutcome;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("series too short: need at least {required} samples, got {got}")]
    TooShort { required: usize, got: usize },

    #[error("degenerate series: {0}")]
    Degenerate(&'static str),

    #[error(
        "fit did not converge after {iterations} generations (best max error {:.6e})",
        best.max_error
    )]
    NotConverged {
        iterations: usize,
        best: Box<FitOutcome>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

/// Coarse classification used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::Domain { .. } | Error::Parse { .. } => {
                ErrorKind::Config
            }
            Error::Io { .. } => ErrorKind::Io,
            Error::TooShort { .. } | Error::Degenerate(_) | Error::NotConverged { .. } => {
                ErrorKind::Numeric
            }
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
