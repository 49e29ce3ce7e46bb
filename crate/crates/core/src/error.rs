use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed decimal input {input:?}: {reason}")]
    Malformed { input: String, reason: &'static str },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("attack {code} not applicable: {reason}")]
    NotApplicable { code: String, reason: String },

    #[error("unknown attack code {0:?}")]
    UnknownAttack(String),

    #[error("attack code {0:?} is already registered")]
    DuplicateAttack(String),

    #[error("attack {code} still not applicable after {attempts} attempts")]
    RetryExhausted { code: String, attempts: u32 },

    #[error("value does not fit in a finite double (>= 2^1024)")]
    Overflow,

    #[error("invalid dataset config: {0}")]
    Config(String),

    #[error("{path}:{line}: malformed record: {reason}")]
    Record {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("json error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
