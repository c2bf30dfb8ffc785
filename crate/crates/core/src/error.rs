use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is singular at the pivot tolerance (min pivot ratio {ratio:e})")]
    Singular { ratio: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("{function} is undefined at k = {k}")]
    Undefined { function: &'static str, k: usize },

    #[error("coefficient validation failed: {identity} residual {residual:e} exceeds {tolerance:e}")]
    Validation {
        identity: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("index {index} out of range 0..={max}")]
    Index { index: usize, max: usize },

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
