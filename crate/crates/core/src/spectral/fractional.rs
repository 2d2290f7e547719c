//! The spectral fractional Laplacian `(-Delta)^s`, diagonal with entries
//! `lambda_k^s` on the Dirichlet eigenbasis, and an independent evaluation of
//! the same multipliers through the heat-semigroup integral
//!
//! ```text
//! lambda^s = 1/Gamma(-s) * int_0^inf (exp(-t lambda) - 1) t^(-1-s) dt.
//! ```

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::real::Real;

use super::field::{SpectralField, TimeSeriesField};
use super::quadrature::{adaptive, GaussLegendre};

/// Fractional power `s`, strictly between 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder<T>(T);

impl<T: Real> FractionalOrder<T> {
    pub fn new(s: T) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::Config(format!(
                "fractional order must lie in (0, 1), got {s}"
            )));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> T {
        self.0
    }

    /// `s / 2`, still a valid order.
    pub fn half(self) -> Self {
        Self(self.0 * T::lit(0.5))
    }
}

/// Per-mode multipliers `lambda_k^s`.
pub fn fractional_multipliers<T: Real>(
    eigenvalues: &Array1<T>,
    s: FractionalOrder<T>,
) -> Array1<T> {
    eigenvalues.mapv(|l| l.powf(s.value()))
}

/// `(-Delta)^s u = sum_k lambda_k^s <u, phi_k> phi_k`.
pub fn apply_fractional_laplacian<T: Real>(
    c: &SpectralField<T>,
    s: FractionalOrder<T>,
) -> SpectralField<T> {
    let m = fractional_multipliers(c.basis.eigenvalues(), s);
    SpectralField {
        basis: c.basis.clone(),
        coeffs: &c.coeffs * &m,
    }
}

/// Snapshot-wise `(-Delta)^s` on a time series.
pub fn apply_fractional_laplacian_series<T: Real>(
    u: &TimeSeriesField<T>,
    s: FractionalOrder<T>,
) -> TimeSeriesField<T> {
    let m = fractional_multipliers(u.basis.eigenvalues(), s);
    TimeSeriesField {
        coeffs: &u.coeffs * &m,
        ..u.clone()
    }
}

/// Node counts and tolerance for the semigroup oracle. The `(0, 1)` part uses
/// `head_nodes` per panel, the `(1, inf)` part `tail_nodes`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub head_nodes: usize,
    pub tail_nodes: usize,
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            head_nodes: 64,
            tail_nodes: 64,
            rel_tol: 1e-13,
            max_depth: 48,
        }
    }
}

/// Lanczos approximation (g = 7, 9 terms), used only on `[1, 2]`.
fn gamma_on_unit_interval<T: Real>(x: T) -> T {
    const G: f64 = 7.0;
    #[allow(clippy::excessive_precision)]
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    debug_assert!(x >= T::one() && x <= T::lit(2.0));
    let z = x - T::one();
    let mut acc = T::lit(COEF[0]);
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += T::lit(*c) / (z + T::from_usize_lossy(i));
    }
    let t = z + T::lit(G + 0.5);
    (T::lit(2.0) * T::PI()).sqrt() * t.powf(z + T::lit(0.5)) * (-t).exp() * acc
}

/// `Gamma(-s)` for `0 < s < 1` via `Gamma(2 - s) / (s (s - 1))`.
pub fn gamma_neg<T: Real>(s: FractionalOrder<T>) -> T {
    let s = s.value();
    gamma_on_unit_interval(T::lit(2.0) - s) / (s * (s - T::one()))
}

/// Semigroup-integral value of `lambda^s` for one eigenvalue.
///
/// `(0, 1)`: substitute `t = tau^(1/(1-s))`, leaving the bounded integrand
/// `(exp(-lambda tau^p) - 1) tau^(-p) / (1 - s)` with `p = 1/(1-s)`.
/// `(1, inf)`: substitute `t = 1/tau` and then `tau = sigma^(1/s)`, leaving
/// `(exp(-lambda sigma^(-1/s)) - 1) / s` on `(0, 1)`.
pub fn semigroup_multiplier<T: Real>(
    lambda: T,
    s: FractionalOrder<T>,
    quad: &QuadratureConfig,
) -> Result<T> {
    if quad.head_nodes == 0 || quad.tail_nodes == 0 {
        return Err(Error::Config(
            "quadrature node counts must be positive".into(),
        ));
    }
    let sv = s.value();
    let one = T::one();
    let p = one / (one - sv);
    let head_rule = GaussLegendre::new(quad.head_nodes)?;
    let tail_rule = GaussLegendre::new(quad.tail_nodes)?;
    let tol = T::lit(quad.rel_tol);

    let head = |tau: T| -> T {
        if tau <= T::zero() {
            return -lambda / (one - sv);
        }
        let tp = tau.powf(p);
        // exp_m1 keeps the small-t cancellation accurate
        (-(lambda * tp)).exp_m1() / tp / (one - sv)
    };
    let tail = |sigma: T| -> T {
        if sigma <= T::zero() {
            return -one / sv;
        }
        (-(lambda * sigma.powf(-one / sv))).exp_m1() / sv
    };
    let (h, _) = adaptive(&head_rule, T::zero(), one, &head, tol, quad.max_depth)?;
    let (t, _) = adaptive(&tail_rule, T::zero(), one, &tail, tol, quad.max_depth)?;
    Ok((h + t) / gamma_neg(s))
}

/// Applies `(-Delta)^s` through the semigroup quadrature, mode by mode.
pub fn semigroup_fractional_laplacian_oracle<T: Real>(
    c: &SpectralField<T>,
    s: FractionalOrder<T>,
    quad: &QuadratureConfig,
) -> Result<SpectralField<T>> {
    let mut coeffs = c.coeffs.clone();
    for (v, lambda) in coeffs.iter_mut().zip(c.basis.eigenvalues()) {
        *v *= semigroup_multiplier(*lambda, s, quad)?;
    }
    Ok(SpectralField {
        basis: c.basis.clone(),
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_basis, DomainSpec};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn ord(s: f64) -> FractionalOrder<f64> {
        FractionalOrder::new(s).unwrap()
    }

    #[test]
    fn order_validation() {
        for bad in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(FractionalOrder::new(bad).is_err());
        }
    }

    #[test]
    fn gamma_reference_values() {
        // Gamma(-1/2) = -2 sqrt(pi)
        assert!((gamma_neg(ord(0.5)) + 2.0 * PI.sqrt()).abs() < 1e-13);
        // Gamma(1.5) = sqrt(pi)/2, Gamma(1) = Gamma(2) = 1
        assert!((gamma_on_unit_interval(1.5f64) - PI.sqrt() / 2.0).abs() < 1e-14);
        assert!((gamma_on_unit_interval(1.0f64) - 1.0).abs() < 1e-14);
        assert!((gamma_on_unit_interval(2.0f64) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenfunction_scaling() {
        let b = Arc::new(build_basis(&DomainSpec::interval(PI, 4).unwrap()).unwrap());
        let out = apply_fractional_laplacian(&SpectralField::unit(b.clone(), 1), ord(0.5));
        assert_eq!(out.coeffs[1], 2.0);
        let c = SpectralField::new(b.clone(), Array1::from(vec![1.0, -2.0, 0.5, 3.0])).unwrap();
        let twice = apply_fractional_laplacian(&apply_fractional_laplacian(&c, ord(0.5)), ord(0.5));
        for k in 0..4 {
            let want = c.coeffs[k] * b.eigenvalues()[k];
            assert!((twice.coeffs[k] - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn oracle_examples() {
        let q = QuadratureConfig::default();
        for s in [0.1, 0.5, 0.9] {
            assert!((semigroup_multiplier(1.0, ord(s), &q).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!((semigroup_multiplier(4.0, ord(0.5), &q).unwrap() - 2.0).abs() < 2e-6);
        assert!((semigroup_multiplier(9.0, ord(0.25), &q).unwrap() - 3f64.sqrt()).abs() < 1.8e-6);
    }

    #[test]
    fn oracle_rejects_empty_rules() {
        let q = QuadratureConfig {
            head_nodes: 0,
            ..Default::default()
        };
        assert!(semigroup_multiplier(2.0, ord(0.5), &q).is_err());
    }
}
