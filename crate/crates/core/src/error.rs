// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument failed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A construction exceeded its configured work budget.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    /// Monte Carlo calibration could not produce a threshold.
    #[error("calibration failure: {0}")]
    CalibrationFailure(String),
    /// A configuration file or data file is malformed.
    #[error("config error: {0}")]
    Config(String),
    /// Filesystem or serialization failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
