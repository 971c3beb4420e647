use std::path::PathBuf;

use thiserror::Error;

/// Broad class of a failure, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("structural error: {0}")]
    Structure(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("key mismatch: {0}")]
    KeyMismatch(String),
    #[error("alignment mismatch: expected {expected} values, found {found}")]
    Alignment { expected: usize, found: usize },
    #[error("invalid distribution for `{parameter}`: {message}")]
    Distribution { parameter: String, message: String },
    #[error("measure incompatible with {sector} schema: {message}")]
    Schema { sector: String, message: String },
    #[error("undefined bias factor for month {month}: modeled total is zero")]
    UndefinedFactor { month: u32 },
    #[error("missing {what}")]
    Missing { what: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::Schema { .. } | Error::Distribution { .. } => {
                ErrorKind::Config
            }
            Error::Json { .. } => ErrorKind::Config,
            Error::Invariant(_) => ErrorKind::Internal,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn missing(what: impl Into<String>) -> Self {
        Error::Missing { what: what.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
