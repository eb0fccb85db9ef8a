//! Error types shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation was called with arguments violating its contract
    /// (dimension mismatches, missing partitions, inconsistent frames).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid configuration (bad kernel, non-divisible dimensions,
    /// partition that cannot fit the image).
    #[error("configuration error: {0}")]
    Config(String),

    /// A non-finite value surfaced in the optimizer.
    #[error("numerical failure (worker {worker}, stage {stage}): {detail}")]
    Numerical {
        worker: usize,
        stage: &'static str,
        detail: String,
    },

    /// A consensus reduction was attempted with inconsistent worker state.
    #[error("synchronization error: {0}")]
    Sync(String),

    /// A measurement (e.g. the circular-edge MTF) could not be performed
    /// on the given input.
    #[error("analysis error: {0}")]
    Analysis(String),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn analysis(msg: impl Into<String>) -> Self {
        Error::Analysis(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
