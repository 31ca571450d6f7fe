use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh needs at least one subdivision per side")]
    EmptyMesh,
    #[error("regularization parameter beta = {0:e} is below the admissible minimum 1e-14")]
    InvalidBeta(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("krylov breakdown: {0}")]
    Breakdown(String),
    #[error("negative curvature p'Sp = {0:e} in conjugate gradients; operator is not SPD")]
    NegativeCurvature(f64),
    #[error("coarse factorization failed: {0}")]
    Factorization(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
