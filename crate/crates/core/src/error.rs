use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value outside the mathematical domain of an operation (NaN, infinity).
    #[error("domain error: {0}")]
    Domain(String),
    /// A violated precondition: wrong dimension, non-positive level, empty input.
    #[error("contract violation: {0}")]
    Contract(String),
    /// An experiment or schedule request that cannot be honored with the given constants.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config parse: {0}")]
    Toml(#[from] toml::de::Error),
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
