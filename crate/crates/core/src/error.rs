use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardyError {
    #[error("exponent s = {0} has Re(s) <= -1/2; (1-z)^s is not in H^2")]
    NotInHardySpace(Complex64),

    #[error("point {0} lies outside the closed unit disk; use evaluate_extrapolated to acknowledge")]
    OutsideDisk(Complex64),

    #[error("degenerate linear fractional map: alpha*delta - beta*gamma = 0")]
    DegenerateMap,

    #[error("map does not send the unit disk into itself: {0}")]
    NotDiskSelfMap(String),

    #[error("invalid half-plane symbol: {0}")]
    InvalidHalfPlaneSymbol(String),

    #[error("expected a {expected} map, got {found}")]
    WrongDomain { expected: &'static str, found: &'static str },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("eigenvalue {lambda} outside 0 < |lambda| < {radius}")]
    OutsideEigenRegion { lambda: Complex64, radius: f64 },

    #[error("no limit along the orbit 1 - a^n (sequence does not settle)")]
    NoLimit,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("csv export failed: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, HardyError>;

impl From<csv::Error> for HardyError {
    fn from(e: csv::Error) -> Self {
        HardyError::Csv(e.to_string())
    }
}
