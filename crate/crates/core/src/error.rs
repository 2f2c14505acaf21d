use thiserror::Error;

use crate::krylov::KrylovStats;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({row}, {col}) out of range for a {n_rows}x{n_cols} matrix")]
    Index {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The inner Krylov solve ran out of iterations. `best` is the iterate
    /// with the smallest observed true residual.
    #[error("inner solver did not converge after {} iterations (residual {:.3e})", stats.iterations, stats.final_residual_norm)]
    NotConverged { best: Vec<f64>, stats: KrylovStats },

    #[error("Lanczos breakdown after {} iterations", stats.iterations)]
    Breakdown { best: Vec<f64>, stats: KrylovStats },

    #[error("null vector has a nonpositive entry at position {0}")]
    InvalidNullVector(usize),

    #[error("system of dimension {n} exceeds the enumeration limit {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("final residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    VerificationFailed { residual: f64, tolerance: f64 },

    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
