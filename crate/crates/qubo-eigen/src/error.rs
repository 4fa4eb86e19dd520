use thiserror::Error;

use crate::eigensolver::EigenResult;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error(
        "matrix is not symmetric: max |a_ij - a_ji| = {max_asym:.3e} exceeds tolerance {tol:.3e}"
    )]
    Asymmetric { max_asym: f64, tol: f64 },

    #[error("{context}: {got} exceeds the supported limit of {limit}")]
    Capacity {
        context: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("matrix is not positive definite ({context})")]
    NotPositiveDefinite { context: &'static str },

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("sampler produced only zero vectors; cannot form an initial guess")]
    DegenerateSamples,

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("no convergence after {iterations} iterations")]
    ConvergenceFailure {
        iterations: usize,
        best: Box<EigenResult>,
    },

    #[error("eigenvalue oracle failed to converge")]
    OracleFailure,

    #[error("matrix market parse error at line {line}: {msg}")]
    MtxFormat { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
