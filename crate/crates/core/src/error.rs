use thiserror::Error;

/// Errors surfaced by the core numerical routines.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("cannot rescale a layer with zero Frobenius norm")]
    ZeroNorm,

    #[error("point is not on the solution manifold: residual {residual:e} exceeds tolerance {tol:e}")]
    OffManifold { residual: f64, tol: f64 },

    #[error("eigensolver failed: LAPACK {routine} returned info={info}")]
    EigFailure { routine: &'static str, info: i32 },

    #[error("negative radicand {0:e}: outside the real branch")]
    NegativeRadicand(f64),

    #[error("root finder did not converge: {0}")]
    NoConvergence(String),

    #[error("no stability change over the bracket [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
