//! Error taxonomy shared by the whole crate.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Malformed input: wrong dimension, out-of-range index, bad parameter.
    #[error("validation error: {0}")]
    Validation(String),

    /// Arithmetically undefined request, e.g. inverting zero.
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear solve was asked for on a rank-deficient system.
    #[error("singular matrix: rank {rank} < {expected}")]
    SingularMatrix { rank: usize, expected: usize },

    /// An exact (brute-force) computation was requested beyond its size cap.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A scenario cannot be set up from the given initial state.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// An operation was called on a node that does not support it.
    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
    pub fn configuration(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
