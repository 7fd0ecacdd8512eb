use thiserror::Error;

use crate::expr::ParseError;

/// Errors raised by jet arithmetic and primitive composition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("division by a jet whose value is zero")]
    DivisionByZero,
    #[error("{func} is not defined at {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("jet order {0} is not supported (maximum 3)")]
    Order(usize),
    #[error("variable '{0}' is not bound in this evaluation")]
    Unbound(&'static str),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("assumption check failed: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    AssumptionFailed { residual: f64, tolerance: f64 },
    #[error("point lies outside the validity region: phase sum {value} exceeds m_infinity {limit}")]
    OutsideValidity { value: f64, limit: f64 },
    #[error("quadrature did not reach tolerance {tol:.1e} (estimate {estimate:.3e})")]
    Quadrature { tol: f64, estimate: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("phase is not a Morse function: {0}")]
    NotMorse(String),
    #[error("integrability violated: |d1 U1 + d2 U2| = {residual:.3e} > {tol:.1e} at ({x}, {y})")]
    Integrability {
        residual: f64,
        tol: f64,
        x: f64,
        y: f64,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("spec file error: {0}")]
    Spec(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
