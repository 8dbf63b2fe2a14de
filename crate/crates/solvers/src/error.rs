use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite data in {0}")]
    NonFinite(&'static str),
    #[error("invalid cone layout: {0}")]
    Cone(String),
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
}
