//! Simulation and inversion toolkit for the Westervelt-type wave equation
//! with spectral fractional damping,
//!
//! ```text
//! d_t^2 (u - kappa u^2) - Delta u + d_t (-Delta)^s u = f   in Omega x (0, T),
//! u = 0 on the boundary,  u(0) = d_t u(0) = 0,
//! ```
//!
//! on axis-aligned boxes with homogeneous Dirichlet conditions.
//!
//! All numerics are generic over [`Real`]; the `*64` aliases below fix the
//! scalar to `f64`, which is what the tolerances in the test-suite assume.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forward;
pub mod inversion;
pub mod kappa;
pub mod lsq;
pub mod real;
pub mod runge;
pub mod spectral;
pub mod sts;
pub mod vector;

pub use error::{Error, Result};
pub use real::Real;

pub type Domain64 = spectral::DomainSpec<f64>;
pub type Basis64 = spectral::EigenBasis<f64>;
pub type TimeGrid64 = spectral::TimeGrid<f64>;
pub type GridField64 = spectral::GridField<f64>;
pub type SpectralField64 = spectral::SpectralField<f64>;
pub type Series64 = spectral::TimeSeriesField<f64>;
pub type GridSeries64 = spectral::GridSeries<f64>;
pub type Order64 = spectral::FractionalOrder<f64>;
