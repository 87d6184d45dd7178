//! Coefficient bounds for zero-free Hardy-space functions, quasiconformal deformations that
//! move chosen Taylor coefficients, and Schwarzian-derivative tools.

// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod deform;
pub mod error;
pub mod extremals;
pub mod integral;
pub mod norms;
pub mod quadrature;
pub mod scalar;
pub mod schwarzian;
pub mod series;

pub use error::{Contract, Error, Result};
pub use scalar::Real;
pub use series::{BoundarySamples, PowerSeries, ZeroFreeReport};

pub use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type PowerSeries64 = PowerSeries<f64>;
pub type PowerSeries32 = PowerSeries<f32>;
