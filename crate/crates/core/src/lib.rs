//! Numerical hyperbolic geometry of bounded planar domains.

pub mod asymptotics;
pub mod conformal;
pub mod domain;
pub mod error;
pub mod metric;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
