use thiserror::Error;

use crate::estimators::Theta;

/// Errors raised by the estimation, resampling and reporting layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid block size {m} for sample of size {n}")]
    InvalidBlockSize { m: usize, n: usize },

    #[error("design matrix is singular (rank deficient)")]
    SingularDesign,

    #[error("Huber fit did not converge after {iterations} iterations (|psi| = {psi_norm:e})")]
    NonConvergence {
        iterations: usize,
        psi_norm: f64,
        last: Theta,
    },

    #[error("degenerate robust fit: {0}")]
    DegenerateFit(String),

    #[error("statistic undefined: {0}")]
    Undefined(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
