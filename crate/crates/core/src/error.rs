use thiserror::Error;

use crate::lp::LpStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain the operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs that should have been produced consistently were not (shape
    /// mismatches, non-unitary measurement matrices, unnormalized tensors).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The LP solver stopped without an optimal vertex.
    #[error("solver finished with status {status:?} after {iterations} iterations: {detail}")]
    Solver {
        status: LpStatus,
        iterations: usize,
        detail: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
