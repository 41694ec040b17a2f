//! Finite-truncation numerics for composition operators on Hardy spaces.

pub mod analytic;
pub mod compop;
pub mod counting;
pub mod cyclic;
pub mod eigen;
pub mod halfplane;
pub mod error;
pub mod moebius;
pub mod series;

pub use error::{HardyError, Result};
pub use num_complex::Complex64;
pub use series::{binomial_series, exp_series, h2_inner, multiply, tail_bound, CoefficientFunction, ComplexExponent};
