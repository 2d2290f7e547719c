use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kappa::mollifier;
use crate::real::Real;
use crate::spectral::{DomainSpec, EigenBasis, GridSeries, TimeGrid, TimeSeriesField};

use super::MeasurementWindow;

/// Smooth space-time bump: a product of one mollifier per axis and one in
/// time, with peak value `amplitude` at the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec<T> {
    pub center: [T; 2],
    pub t_center: T,
    pub radius: [T; 2],
    pub t_radius: T,
    pub amplitude: T,
}

impl<T: Real> BumpSpec<T> {
    /// Rejects bumps whose support leaves `[x_first, x_last]` of the window's
    /// nodes on some axis, or `[dt, T - dt]` in time.
    pub fn check_support(
        &self,
        window: &MeasurementWindow,
        domain: &DomainSpec<T>,
        time: &TimeGrid<T>,
    ) -> Result<()> {
        window.check_domain(domain)?;
        for d in 0..domain.dim() {
            let (lo, hi) = window.node_span(domain, d);
            let r = self.radius[d];
            if !(r > T::zero()) || self.center[d] - r < lo || self.center[d] + r > hi {
                return Err(Error::Support(format!(
                    "bump [{}, {}] on axis {d} leaves the window span [{lo}, {hi}]",
                    self.center[d] - r,
                    self.center[d] + r
                )));
            }
        }
        let dt = time.dt();
        let (a, b) = (self.t_center - self.t_radius, self.t_center + self.t_radius);
        if !(self.t_radius > T::zero()) || a < dt || b > time.t_final() - dt {
            return Err(Error::Support(format!(
                "bump time support [{a}, {b}] leaves [{dt}, {}]",
                time.t_final() - dt
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: [T; 2], t: T, dim: usize) -> T {
        let space = (0..dim).fold(self.amplitude, |acc, d| {
            acc * mollifier((x[d] - self.center[d]) / self.radius[d])
        });
        space * mollifier((t - self.t_center) / self.t_radius)
    }
}

/// Nodal samples of the bump; exactly zero outside its support.
pub fn source_bump_grid<T: Real>(
    spec: &BumpSpec<T>,
    window: &MeasurementWindow,
    domain: &DomainSpec<T>,
    time: TimeGrid<T>,
) -> Result<GridSeries<T>> {
    spec.check_support(window, domain, &time)?;
    let dim = domain.dim();
    Ok(GridSeries::from_fn(domain.clone(), time, |x, t| {
        spec.value(x, t, dim)
    }))
}

pub fn source_bump<T: Real>(
    spec: &BumpSpec<T>,
    window: &MeasurementWindow,
    basis: &Arc<EigenBasis<T>>,
    time: TimeGrid<T>,
) -> Result<TimeSeriesField<T>> {
    source_bump_grid(spec, window, basis.domain(), time)?.to_spectral(basis)
}
