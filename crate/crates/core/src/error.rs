//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |A - A†| = {deviation:.3e}, tolerance {tol:.1e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not unitary (max |UU† - I| = {residual:.3e}, tolerance {tol:.1e})")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("trace must be 1 (got {trace:.12e}, tolerance {tol:.1e})")]
    NonUnitTrace { trace: f64, tol: f64 },

    #[error("matrix has eigenvalue {eigenvalue:.3e} below the PSD tolerance -{tol:.1e}")]
    NotPositiveSemidefinite { eigenvalue: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("spin must be a positive half-integer, got {value}")]
    InvalidSpin { value: f64 },

    #[error("parity block dimensions {p} + {q} do not sum to d = {dim}")]
    InvalidBlockDims { p: usize, q: usize, dim: usize },

    #[error("eigendecomposition residual {residual:.3e} exceeds {tol:.1e}; input too ill-conditioned")]
    UnstableEigendecomposition { residual: f64, tol: f64 },

    #[error("all off-diagonal elements vanish: the state is an eigenstate of the evolution unitary and its diagonal cannot be recovered")]
    EigenstateAmbiguity,

    #[error("record length {record} does not match design matrix rows {rows}")]
    RecordLengthMismatch { record: usize, rows: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
