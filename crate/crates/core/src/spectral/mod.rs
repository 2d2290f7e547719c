//! Dirichlet eigenbasis, sine transforms, the spectral fractional Laplacian
//! and discrete norms.

mod basis;
mod domain;
mod field;
mod fractional;
mod norms;
pub mod quadrature;
mod timediff;

pub use basis::{build_basis, EigenBasis, Mode};
pub use domain::{DomainSpec, TimeGrid};
pub use field::{
    nodal_l2, to_grid, to_spectral, GridField, GridSeries, SpectralField, TimeSeriesField,
};
pub use fractional::{
    apply_fractional_laplacian, apply_fractional_laplacian_series, fractional_multipliers,
    gamma_neg, semigroup_fractional_laplacian_oracle, semigroup_multiplier, FractionalOrder,
    QuadratureConfig,
};
pub use norms::{sobolev_norm, zm_norm, ZM_MAX_ORDER};
pub use timediff::TimeStencil;
