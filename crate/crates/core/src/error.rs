use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A polygon norm literal failed validation.
    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    /// Disconnected, cyclic or otherwise malformed tree/topology.
    #[error("structural error: {0}")]
    Structural(String),

    /// An operation was called outside its precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// The instance exceeds what a solver supports.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A construction failed its own verification.
    #[error("construction failed: {0}")]
    Construction(String),

    /// A Steiner bond appeared where the canonicalizer needs bond-freeness.
    #[error("Steiner bond encountered at {node} ({trace_len} steps completed)")]
    BondEncountered { node: String, trace_len: usize },

    /// A randomized search exhausted its budget.
    #[error("search failed after {trials} trials: {reason}")]
    SearchFailed { trials: usize, reason: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
