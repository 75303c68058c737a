use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit codes: invalid
/// input (1), solver non-convergence (2), I/O and parse failures (3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} did not converge within {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
