//! Preintegration and conditional sampling for option pricing with discontinuous payoffs.
//!
//! The numerical core is generic over `f32`/`f64`; the convergence experiment is `f64` only.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anova;
pub mod brownian;
pub mod error;
pub mod experiment;
pub mod lowdisc;
pub mod payoff;
pub mod preint;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TimeGridF64 = brownian::TimeGrid<f64>;
pub type TimeGridF32 = brownian::TimeGrid<f32>;
pub type CovarianceMatrixF64 = brownian::CovarianceMatrix<f64>;
pub type CovarianceMatrixF32 = brownian::CovarianceMatrix<f32>;
pub type PathFactorizationF64 = brownian::PathFactorization<f64>;
pub type PathFactorizationF32 = brownian::PathFactorization<f32>;
pub type MarketParamsF64 = payoff::MarketParams<f64>;
pub type MarketParamsF32 = payoff::MarketParams<f32>;
pub type DigitalAsianF64 = payoff::DigitalAsian<f64>;
pub type DigitalAsianF32 = payoff::DigitalAsian<f32>;
