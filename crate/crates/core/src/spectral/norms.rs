//! Spectral Sobolev norms and the discrete mixed space-time `Z^m` norm
//! `||u||_{Z^m}^2 = sum_{k=0}^m int_0^T ||d_t^{m-k} u||_{H^k}^2 dt`.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::real::Real;

use super::field::{SpectralField, TimeSeriesField};
use super::timediff::TimeStencil;

/// Highest time-derivative order supported by [`zm_norm`].
pub const ZM_MAX_ORDER: usize = 4;

pub(crate) fn weighted_sq<T: Real>(
    eigenvalues: &Array1<T>,
    coeffs: ndarray::ArrayView1<T>,
    r: T,
) -> T {
    coeffs
        .iter()
        .zip(eigenvalues)
        .map(|(c, l)| l.powf(r) * *c * *c)
        .sum()
}

/// `(sum_k lambda_k^r |c_k|^2)^(1/2)` for `r` in `[-2, 2]`.
pub fn sobolev_norm<T: Real>(c: &SpectralField<T>, r: T) -> Result<T> {
    if !(r >= T::lit(-2.0) && r <= T::lit(2.0)) {
        return Err(Error::Config(format!(
            "Sobolev index must lie in [-2, 2], got {r}"
        )));
    }
    Ok(weighted_sq(c.basis.eigenvalues(), c.coeffs.view(), r).sqrt())
}

/// Discrete `Z^m` norm: repeated central differences in time, spectral
/// `H^k` norms `sum lambda^k c^2` in space, trapezoid rule in time.
pub fn zm_norm<T: Real>(u: &TimeSeriesField<T>, m: usize) -> Result<T> {
    if m > ZM_MAX_ORDER {
        return Err(Error::Config(format!(
            "Z^m norm supports m <= {ZM_MAX_ORDER}, got {m}"
        )));
    }
    if u.time.n_steps() <= m.max(2) {
        return Err(Error::Config(format!(
            "Z^{m} norm needs more than {} time steps, got {}",
            m.max(2),
            u.time.n_steps()
        )));
    }
    let d = TimeStencil::first_derivative(u.time)?;
    // derivs[j] = d_t^j u
    let mut derivs: Vec<Array2<T>> = vec![u.coeffs.clone()];
    for j in 1..=m {
        let next = d.apply(&derivs[j - 1]);
        derivs.push(next);
    }
    let lam = u.basis.eigenvalues();
    let dt = u.time.dt();
    let mut total = T::zero();
    for k in 0..=m {
        let series = &derivs[m - k];
        let r = T::from_usize_lossy(k);
        for (n, row) in series.axis_iter(Axis(0)).enumerate() {
            total += u.time.trapezoid_weight(n) * dt * weighted_sq(lam, row, r);
        }
    }
    Ok(total.sqrt())
}
