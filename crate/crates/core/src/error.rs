use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad argument: wrong shape, out-of-range parameter, unknown name.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Input violates a structural invariant (asymmetric block, invalid state).
    #[error("validation failed: {0}")]
    Validation(String),

    /// A coefficient hits a pole or a zero that the formula divides by.
    #[error("singularity: {0}")]
    Singularity(String),

    /// Linear algebra failure (singular matrix, non-convergent eigensolver).
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Integrator drifted off the symplectic group.
    #[error("integration diverged at t = {time}: symplectic defect {defect:e} exceeds {limit:e}")]
    Divergence { time: f64, defect: f64, limit: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
