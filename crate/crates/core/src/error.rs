use thiserror::Error;

use crate::phcore::ValidationReport;

/// Errors raised by the reduction and error-bound machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("structure validation failed: {0}")]
    Validation(ValidationReport),

    #[error("descriptor matrix E is singular")]
    SingularE,

    #[error("energy matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("input signal does not cover the time grid: {0}")]
    GridMismatch(String),

    #[error("invalid input signal: {0}")]
    InvalidInput(String),

    #[error("step matrix of the implicit midpoint scheme is singular")]
    SingularStep,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("dense exponential oracle limited to N <= {limit}, got N = {n}")]
    OracleTooLarge { n: usize, limit: usize },

    #[error("rank deficient: requested {requested} modes but only {available} are available")]
    RankDeficient { requested: usize, available: usize },

    #[error("basis is not column-rank sufficient: {0}")]
    RankDeficientBasis(String),

    #[error("basis was not produced by POD truncation of these snapshots")]
    NotNested,

    #[error("primal basis is not the column prefix of the hierarchical basis")]
    NotPrefix,

    #[error("reduced system lost port-Hamiltonian structure: {0}")]
    StructureLost(String),

    #[error("Gram matrix of the basis is singular")]
    SingularGram,

    #[error("every grid point fell below the effectivity floor {floor:e}")]
    AllPointsSkipped { floor: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(what: &'static str, expected: impl ToString, found: impl ToString) -> Error {
    Error::ShapeMismatch {
        what,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
