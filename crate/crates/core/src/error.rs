use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Vector/matrix sizes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Degenerate geometry, e.g. a partition with an empty cell.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The requested operation is not available for this kernel form.
    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    /// The iteration produced a non-finite energy.
    #[error("solver diverged at iteration {iteration} with step gamma = {gamma:e}")]
    Divergence { gamma: f64, iteration: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
