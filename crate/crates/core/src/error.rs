use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A requested feature (resonance, stopband, branch crossing) does not
    /// exist in the supplied data.
    #[error("not found: {0}")]
    NotFound(String),

    /// The requested Gaussian geometry has no stable solution.
    #[error("unstable geometry: {0}")]
    UnstableGeometry(String),

    /// An iterative numerical procedure failed to produce a usable answer.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Malformed input data (file contents, documents).
    #[error("input format: {0}")]
    InputFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn not_found(msg: impl Into<String>) -> Self {
        Error::NotFound(msg.into())
    }
}
