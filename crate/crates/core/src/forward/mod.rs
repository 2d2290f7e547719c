//! Time integration of the linear, variable-coefficient and nonlinear damped
//! wave problems.
//!
//! The scheme is leapfrog for `u_tt + lambda u` with the damping term
//! `lambda^s u_t` taken as the centered (trapezoidal) difference, mode by mode:
//!
//! ```text
//! (u[n+1] - 2u[n] + u[n-1]) / dt^2 + d (u[n+1] - u[n-1]) / 2dt + lambda u[n] = f[n]
//! ```
//!
//! started from `u[0] = 0`, `u[1] = dt^2 f[0] / (2 (1 + dt d / 2))`. With that
//! start the discrete solution operator is exactly adjoint, in the
//! trapezoid-weighted space-time inner product, to the same scheme run
//! backwards in time, which is how the dual problem is solved.

mod energy;
mod linear;
mod nonlinear;
mod variable;

pub use energy::{energy_report, EnergyReport};
pub use linear::{solve_dual_linear, solve_linear};
pub use nonlinear::{picard_source, solve_nonlinear, NonlinearSolveResult};
pub use variable::{check_mass_coefficient, solve_variable_coefficient};

#[allow(unused_imports)]
pub(crate) use nonlinear::solve_nonlinear_sampled;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{EigenBasis, TimeGrid};

/// Time grid, stability margin and iteration controls shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig<T> {
    pub time: TimeGrid<T>,
    /// Fraction of the leapfrog stability limit `dt <= 2 / sqrt(lambda_max)`.
    pub cfl_safety: T,
    /// Stop the fixed-point iteration once the discrete `Z^1` norm of the
    /// difference of successive iterates drops below this.
    pub picard_tol: T,
    pub picard_max_iter: usize,
    /// Smallest admissible value of `1 - 2 kappa v`.
    pub coefficient_floor: T,
    /// Relative residual for the per-step mass-matrix solve.
    pub inner_tol: T,
    pub inner_max_iter: usize,
}

impl<T: Real> SolveConfig<T> {
    pub fn new(time: TimeGrid<T>) -> Self {
        Self {
            time,
            cfl_safety: T::lit(0.9),
            picard_tol: T::lit(1e-10),
            picard_max_iter: 60,
            coefficient_floor: T::lit(0.25),
            inner_tol: T::lit(1e-14),
            inner_max_iter: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: T| v > T::zero() && v <= T::one();
        if !in_unit(self.cfl_safety) {
            return Err(Error::Config(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if !(self.picard_tol > T::zero()) || !(self.inner_tol > T::zero()) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.picard_max_iter == 0 || self.inner_max_iter == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        if !(self.coefficient_floor > T::zero() && self.coefficient_floor < T::one()) {
            return Err(Error::Config(format!(
                "coefficient_floor must lie in (0, 1), got {}",
                self.coefficient_floor
            )));
        }
        Ok(())
    }

    /// Checks `dt <= cfl_safety * 2 sqrt(mass_min) / sqrt(lambda_max)`.
    pub fn check_cfl(&self, basis: &EigenBasis<T>, mass_min: T) -> Result<()> {
        let dt = self.time.dt();
        let limit = self.cfl_safety * T::lit(2.0) * mass_min.sqrt() / basis.lambda_max().sqrt();
        if dt > limit {
            return Err(Error::Cfl {
                dt: dt.to_f64_lossy(),
                required: limit.to_f64_lossy(),
            });
        }
        Ok(())
    }
}
