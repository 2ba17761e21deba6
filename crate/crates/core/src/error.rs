use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("index {index} outside [-{half}, {half}]")]
    IndexOutOfRange { index: i64, half: i64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("numerical breakdown: {0}")]
    Breakdown(String),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("newton did not converge: {0}")]
    NewtonDiverged(String),
    #[error("iteration collapsed onto the trivial state psi = 0")]
    TrivialState,
    #[error("eigensolver did not converge: {0}")]
    Eigen(String),
    #[error("continuation failed: {0}")]
    Continuation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
