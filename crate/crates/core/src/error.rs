//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by the library.
///
/// `InvalidInput` covers precondition violations (zero frequency vectors,
/// nonsummable family parameters, dimension mismatches, malformed configs).
/// `ResourceLimit` is returned instead of silently truncating when an
/// enumeration would exceed a configured cap. `Numeric` marks computations
/// that degenerated (empty fits, non-finite intermediate values).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
