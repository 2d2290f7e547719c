use ndarray::{Array1, Array2, ArrayView1, Zip};

use crate::error::{shape_err, Result};
use crate::real::Real;
use crate::spectral::{fractional_multipliers, FractionalOrder, TimeSeriesField};

use super::SolveConfig;

/// Per-mode constants of the damped leapfrog step.
pub(crate) struct Stepper<T> {
    pub lambda: Array1<T>,
    pub damping: Array1<T>,
    /// `1 + dt d_k / 2`
    pub precond: Array1<T>,
    pub dt: T,
}

impl<T: Real> Stepper<T> {
    pub fn new(u: &TimeSeriesField<T>, s: FractionalOrder<T>) -> Self {
        let dt = u.time.dt();
        let lambda = u.basis.eigenvalues().clone();
        let damping = fractional_multipliers(&lambda, s);
        let precond = damping.mapv(|d| T::one() + T::lit(0.5) * dt * d);
        Self {
            lambda,
            damping,
            precond,
            dt,
        }
    }

    /// `dt^2 (f - lambda u[n] - d (u[n] - u[n-1]) / dt)`, the right-hand side
    /// for the second difference `y = u[n+1] - 2u[n] + u[n-1]`.
    pub fn rhs(&self, f: ArrayView1<T>, cur: ArrayView1<T>, prev: ArrayView1<T>) -> Array1<T> {
        let dt = self.dt;
        let dt2 = dt * dt;
        let mut r = Array1::zeros(f.len());
        Zip::from(&mut r)
            .and(f)
            .and(cur)
            .and(prev)
            .and(&self.lambda)
            .and(&self.damping)
            .for_each(|r, &f, &c, &p, &l, &d| *r = dt2 * (f - l * c - d * (c - p) / dt));
        r
    }

    /// `P^-1 b` with `P = 1 + dt d / 2`.
    pub fn precondition(&self, b: &Array1<T>) -> Array1<T> {
        b / &self.precond
    }

    /// Runs the scheme; `solve_step(n, b)` returns `y` solving the step system
    /// at level `n`. With `solve_step = precondition` this is the
    /// constant-coefficient scheme.
    pub fn run(
        &self,
        f: &Array2<T>,
        mut solve_step: impl FnMut(usize, Array1<T>) -> Result<Array1<T>>,
    ) -> Result<Array2<T>> {
        let (nt, nm) = f.dim();
        let mut u = Array2::zeros((nt, nm));
        let half = T::lit(0.5);
        let y0 = solve_step(0, f.row(0).mapv(|v| v * self.dt * self.dt))?;
        u.row_mut(1).assign(&(y0 * half));
        for n in 1..nt - 1 {
            let b = self.rhs(f.row(n), u.row(n), u.row(n - 1));
            let y = solve_step(n, b)?;
            let next = &y + &(u.row(n).to_owned() * T::lit(2.0)) - u.row(n - 1);
            u.row_mut(n + 1).assign(&next);
        }
        Ok(u)
    }
}

pub(crate) fn check_source<T: Real>(f: &TimeSeriesField<T>, cfg: &SolveConfig<T>) -> Result<()> {
    cfg.validate()?;
    if f.time != cfg.time {
        return Err(shape_err(
            format!("{:?}", cfg.time),
            format!("{:?}", f.time),
        ));
    }
    Ok(())
}

/// Solves `u_tt - Delta u + d_t (-Delta)^s u = f`, `u(0) = u_t(0) = 0`.
pub fn solve_linear<T: Real>(
    f: &TimeSeriesField<T>,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<TimeSeriesField<T>> {
    check_source(f, cfg)?;
    cfg.check_cfl(&f.basis, T::one())?;
    let stepper = Stepper::new(f, s);
    let coeffs = stepper.run(&f.coeffs, |_, b| Ok(stepper.precondition(&b)))?;
    Ok(TimeSeriesField {
        coeffs,
        ..f.clone()
    })
}

/// Solves the final-value dual problem
/// `v_tt - Delta v - d_t (-Delta)^s v = g`, `v(T) = v_t(T) = 0`
/// through `tau = T - t`, which turns it into [`solve_linear`] with the
/// reversed source.
pub fn solve_dual_linear<T: Real>(
    g: &TimeSeriesField<T>,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<TimeSeriesField<T>> {
    Ok(solve_linear(&g.time_reversed(), s, cfg)?.time_reversed())
}
