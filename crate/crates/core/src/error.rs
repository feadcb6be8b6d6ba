//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the synthesis and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented constraints.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument to an operation is inconsistent with the other inputs.
    #[error("argument error: {0}")]
    Argument(String),

    /// The physical scene produces a numerically unusable model
    /// (e.g. a coherence matrix that stays non-positive-definite after
    /// the regularization cap).
    #[error("model error: {0}")]
    Model(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
}
