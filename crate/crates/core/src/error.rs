use ellipt_solvers::{SolverError, Status};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("solver did not converge ({status:?}) while {context}")]
    Solver { status: Status, context: String },
    #[error(transparent)]
    Backend(#[from] SolverError),
    #[error("root finding residual {0:e} exceeds tolerance")]
    RootFinding(f64),
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Dimension(format!("{what} has length {got}, expected {want}")))
    }
}
