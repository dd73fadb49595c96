use thiserror::Error;

/// Errors produced by the recovery library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("autocorrelation model is not positive semidefinite (Cholesky failed at row {row})")]
    NotPsd { row: usize },

    #[error("infeasible parameters: |p_l| = {pl} must be strictly below p0 = {p0}")]
    Infeasible { p0: f64, pl: f64 },

    #[error("exponent overflow: alpha^2/(4 beta) = {exponent:.3} exceeds 700, d too large for this (p0, p_l)")]
    ExponentOverflow { exponent: f64 },

    #[error("degenerate Hankel system (condition number {condition:.3e})")]
    HankelDegenerate { condition: f64 },

    #[error("non-finite function value at {at}")]
    NonFinite { at: f64 },

    #[error("approximation breakdown: forward value {value} outside [-1.05, 1.05]")]
    Breakdown { value: f64 },

    #[error("variance unidentifiable at this threshold mean ({0})")]
    Unidentifiable(String),

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    QuadratureTolerance { tol: f64, estimate: f64 },

    #[error("all {starts} starts failed to converge: {diagnostics}")]
    NoConvergence { starts: usize, diagnostics: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{0} not retained in dataset")]
    NotRetained(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
