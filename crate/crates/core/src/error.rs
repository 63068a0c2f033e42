use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Quadrature or a linear solve failed to produce a trustworthy value.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The demand model lacks a capability the operation needs.
    #[error("unsupported model: {0}")]
    Unsupported(String),

    /// A model could not be built with the requested parameters.
    #[error("construction error: {0}")]
    Construction(String),

    /// Policy state was driven out of its contract.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("malformed history record at index {index}: {reason}")]
    MalformedHistory { index: usize, reason: String },

    /// An episode broke an invariant and was stopped.
    #[error("episode aborted: {0}")]
    Abort(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
