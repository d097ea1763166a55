use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A size/memory cap was exceeded; nothing was allocated.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    /// The requested parameters fall outside the regime where the
    /// quantity is defined (e.g. Weingarten at D < k).
    #[error("unsupported regime: {0}")]
    Regime(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A gate or observable was routed to a backend that cannot host it.
    #[error("backend mismatch: {0}")]
    Backend(String),

    #[error("graph is not connected")]
    Disconnected,
}

pub type Result<T> = std::result::Result<T, Error>;
