use thiserror::Error;

/// Errors raised by mesh construction, solvers and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("linear solver did not converge: {0}")]
    SolverFailure(String),
    #[error(
        "nonlinear iteration did not converge after {sweeps} sweeps (residual {residual:.3e})"
    )]
    PicardFailure { sweeps: usize, residual: f64 },
    #[error("singular local matrix on cell {0}")]
    SingularLocalMatrix(usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
