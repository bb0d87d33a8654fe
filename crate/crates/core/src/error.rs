use thiserror::Error;

/// Errors raised by discretization, solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("invalid kernel: {0}")]
    Kernel(String),
    #[error("invalid coefficient field: {0}")]
    Coefficient(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("horizon mismatch: grid delta {grid}, kernel delta {kernel}")]
    HorizonMismatch { grid: f64, kernel: f64 },
    #[error("volume constraint violated at node {node}: expected {expected}, got {got}")]
    Constraint { node: usize, expected: f64, got: f64 },
    #[error("invalid solver configuration: {0}")]
    Solver(String),
    #[error("invalid cost specification: {0}")]
    Cost(String),
    #[error("state is not admissible: variational residual {residual:e} exceeds {tol:e}")]
    OffManifold { residual: f64, tol: f64 },
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
