use thiserror::Error;

/// Errors produced by constructors and operations in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Shape or dimension of an input does not match what the operation needs.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A structural invariant (positivity, normalization, trace preservation,
    /// isometry, ...) is violated beyond its tolerance.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// An argument is outside the admissible domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
