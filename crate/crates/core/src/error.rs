use thiserror::Error;

/// Errors raised by the numerical operations and the command line driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration failure: {0}")]
    Integration(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("degenerate immersion at ({u1}, {u2}): EG - F^2 = {det:e}")]
    Degenerate { u1: f64, u2: f64, det: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("iteration diverged: {0}")]
    Divergence(String),
    #[error("elliptic regime: |trace| = {trace} <= 2 for mode {j}")]
    Elliptic { j: i32, trace: f64 },
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Range(_)
            | Error::Config(_)
            | Error::Precondition(_)
            | Error::Consistency(_)
            | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
