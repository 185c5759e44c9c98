use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spin quantum number {0}: 2j must be a non-negative integer")]
    InvalidSpin(String),

    #[error("dimension {dim} exceeds the configured maximum {max} (j_max = {j_max})")]
    DimensionOverflow { dim: usize, max: usize, j_max: f64 },

    #[error("numerical degeneracy: {what} residual {residual:e} exceeds {tolerance:e}")]
    NumericalDegeneracy {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("eigenvalue m = {m} outside [-{j}, {j}]")]
    OutOfRange { m: f64, j: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sharpness lambda = {0} outside [0, 1]")]
    InvalidSharpness(f64),

    #[error("visibility v = {0} outside [0, 1]")]
    InvalidVisibility(f64),

    #[error("grouping x = {x} outside [0, floor(j) = {max}]")]
    InvalidGrouping { x: usize, max: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("no closed form available for {0}")]
    ClosedFormUnavailable(String),

    #[error("tolerance {0} below the minimum 1e-6")]
    InvalidTolerance(f64),

    #[error("scan step {0} outside (0, 1]")]
    InvalidScanStep(f64),

    #[error("unknown table {0}; tables are numbered 1 to 10")]
    UnknownTable(u32),
}

pub type Result<T> = std::result::Result<T, Error>;
