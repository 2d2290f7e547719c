//! The source-to-solution map `f -> u|_W`, smooth sources supported in the
//! observation window, and finite-difference linearizations in the source
//! amplitude.

mod bump;
mod linearize;
mod second_order;
mod window;

pub use bump::{source_bump, source_bump_grid, BumpSpec};
pub use linearize::{
    cross_linearization, cross_linearization_on, first_linearization, first_linearization_on,
    CrossStencil, LinearizationResult,
};
pub use second_order::{second_order_source, verify_v_equation, VEquationCheck};
pub use window::{MeasurementWindow, RestrictedSeries};

pub(crate) use linearize::{cross_generic, Forward};
pub(crate) use second_order::second_order_source_from_product;

use crate::error::{Error, Result};
use crate::forward::{solve_nonlinear, SolveConfig};
use crate::kappa::KappaField;
use crate::real::Real;
use crate::spectral::{FractionalOrder, TimeSeriesField};

/// Relative size of source values tolerated outside `W x (0, T)`, to allow
/// for transform round-off.
const SUPPORT_TOL: f64 = 1e-12;

/// Checks that `f` vanishes outside the window and at `t = 0, T`.
pub fn check_window_support<T: Real>(
    f: &TimeSeriesField<T>,
    window: &MeasurementWindow,
) -> Result<()> {
    window.check_domain(f.basis.domain())?;
    let g = f.to_grid_series();
    let tol = T::lit(SUPPORT_TOL) * g.max_abs();
    let last = f.n_times() - 1;
    for ((n, j), v) in g.values.indexed_iter() {
        if v.abs() > tol && (n == 0 || n == last || !window.contains(j)) {
            return Err(Error::Support(format!(
                "source value {v} at time level {n}, node {j} lies outside the window"
            )));
        }
    }
    Ok(())
}

/// `L_{kappa, W} f`: the nonlinear solution observed on the window.
pub fn source_to_solution<T: Real>(
    kappa: &KappaField<T>,
    f: &TimeSeriesField<T>,
    window: &MeasurementWindow,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<RestrictedSeries<T>> {
    check_window_support(f, window)?;
    window.restrict(&solve_nonlinear(kappa, f, s, cfg)?.u)
}
