use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CspError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),

    #[error("coefficient vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("operation requires a nonzero polynomial")]
    ZeroPolynomial,

    #[error("operation requires n = 1, instance has n = {0}")]
    NotUnivariate(usize),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("polynomials {0} and {1} are identical; collapse duplicates first")]
    IdenticalPolynomials(usize, usize),

    #[error("value {value} is not attained by any polynomial at x within tol {tol}")]
    EmptyActiveSet { value: f64, tol: f64 },

    #[error("empty active set or polytope")]
    EmptyPolytope,

    #[error(
        "min-norm point did not converge after {iterations} iterations (violation {violation:e})"
    )]
    MinNormNotConverged {
        iterations: usize,
        violation: f64,
        best_point: Vec<f64>,
        best_weights: Vec<f64>,
    },

    #[error("too many polynomials: r = {r} exceeds the subset limit {limit}")]
    TooManyPolynomials { r: usize, limit: usize },

    #[error("point is not a critical point of the selection (slope {0:e})")]
    NotCritical(f64),

    #[error("non-finite coefficient cannot be converted to a rational")]
    NonRational,

    #[error("sublevel set is empty")]
    EmptySublevelSet,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("selection does not fit the instance: {0}")]
    InvalidSelection(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = CspError> = std::result::Result<T, E>;
