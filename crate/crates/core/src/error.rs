use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("entropy pool exhausted: requested {requested} bits, {available} remaining")]
    PoolExhausted { requested: usize, available: usize },

    #[error("seed stream exhausted after {emitted} of {requested} output bits")]
    SeedExhausted { emitted: usize, requested: usize },

    #[error("authentication failed: envelope was modified or the key is wrong")]
    Authentication,

    #[error("unsupported envelope version {0}")]
    UnsupportedVersion(u8),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam { name, reason: reason.into() }
    }
}
