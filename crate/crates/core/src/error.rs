use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid initial data: {field} has value {value} at node {node}")]
    InvalidInitialData {
        field: &'static str,
        node: usize,
        value: f64,
    },

    #[error("fixed-point iteration did not converge at step {step} after {iterations} iterations (last residual {last:e})")]
    NonConvergence {
        step: usize,
        iterations: usize,
        last: f64,
        residuals: Vec<f64>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed field snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
