//! Second-order finite differences in time acting on `(n_times, _)` arrays.
//! Interior levels use central stencils; the end levels use one-sided
//! second-order stencils.

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::real::Real;

use super::domain::TimeGrid;

/// Banded time operator stored row by row.
#[derive(Debug, Clone)]
pub struct TimeStencil<T> {
    rows: Vec<Vec<(usize, T)>>,
    time: TimeGrid<T>,
}

impl<T: Real> TimeStencil<T> {
    /// `d/dt`: `(u[n+1] - u[n-1]) / 2dt`, ends `(-3u0 + 4u1 - u2) / 2dt`.
    pub fn first_derivative(time: TimeGrid<T>) -> Result<Self> {
        let nt = time.n_times();
        if nt < 3 {
            return Err(Error::Config(format!(
                "first derivative needs >= 3 time levels, got {nt}"
            )));
        }
        let c = T::one() / (T::lit(2.0) * time.dt());
        let mut rows = Vec::with_capacity(nt);
        rows.push(vec![(0, -T::lit(3.0) * c), (1, T::lit(4.0) * c), (2, -c)]);
        for n in 1..nt - 1 {
            rows.push(vec![(n - 1, -c), (n + 1, c)]);
        }
        let l = nt - 1;
        rows.push(vec![
            (l - 2, c),
            (l - 1, -T::lit(4.0) * c),
            (l, T::lit(3.0) * c),
        ]);
        Ok(Self { rows, time })
    }

    /// `d2/dt2`: `(u[n+1] - 2u[n] + u[n-1]) / dt^2`, ends
    /// `(2u0 - 5u1 + 4u2 - u3) / dt^2`.
    pub fn second_derivative(time: TimeGrid<T>) -> Result<Self> {
        let nt = time.n_times();
        if nt < 4 {
            return Err(Error::Config(format!(
                "second derivative needs >= 4 time levels, got {nt}"
            )));
        }
        let c = T::one() / (time.dt() * time.dt());
        let two = T::lit(2.0);
        let mut rows = Vec::with_capacity(nt);
        rows.push(vec![
            (0, two * c),
            (1, -T::lit(5.0) * c),
            (2, T::lit(4.0) * c),
            (3, -c),
        ]);
        for n in 1..nt - 1 {
            rows.push(vec![(n - 1, c), (n, -two * c), (n + 1, c)]);
        }
        let l = nt - 1;
        rows.push(vec![
            (l - 3, -c),
            (l - 2, T::lit(4.0) * c),
            (l - 1, -T::lit(5.0) * c),
            (l, two * c),
        ]);
        Ok(Self { rows, time })
    }

    pub fn apply(&self, u: &Array2<T>) -> Array2<T> {
        let mut out = Array2::zeros(u.raw_dim());
        for (n, row) in self.rows.iter().enumerate() {
            let mut o = out.row_mut(n);
            for &(m, c) in row {
                o.scaled_add(c, &u.row(m));
            }
        }
        out
    }

    /// Adjoint with respect to the trapezoid-weighted time inner product,
    /// `W^-1 S^T W`.
    pub fn apply_adjoint(&self, y: &Array2<T>) -> Array2<T> {
        let mut out = Array2::zeros(y.raw_dim());
        for (n, row) in self.rows.iter().enumerate() {
            let wn = self.time.trapezoid_weight(n);
            for &(m, c) in row {
                out.row_mut(m).scaled_add(c * wn, &y.row(n));
            }
        }
        for (m, mut r) in out.axis_iter_mut(Axis(0)).enumerate() {
            r /= self.time.trapezoid_weight(m);
        }
        out
    }
}
