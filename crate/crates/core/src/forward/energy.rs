use crate::error::Result;
use crate::real::Real;
use crate::spectral::{fractional_multipliers, FractionalOrder, TimeSeriesField};

/// Discrete energy balance of a solution.
///
/// Entry `n >= 1` describes the half step `t[n] - dt/2`:
/// `kinetic = sum (1 - lambda dt^2 / 4) |(u[n] - u[n-1]) / dt|^2` and
/// `potential = sum lambda |(u[n] + u[n-1]) / 2|^2`, whose sum is the conserved
/// leapfrog energy. `damping_integral` accumulates
/// `dt sum lambda^s |(u[j+1] - u[j-1]) / 2dt|^2` over `j < n`, and
/// `source_integral` is the trapezoid rule for `int_0^t |f|^2`. Entry 0 is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport<T> {
    pub time: Vec<T>,
    pub kinetic: Vec<T>,
    pub potential: Vec<T>,
    pub damping_integral: Vec<T>,
    pub source_integral: Vec<T>,
    /// `max_n (kinetic + potential + damping_integral) / source_integral` over
    /// levels with a nonzero source integral; zero if there are none.
    pub ratio: T,
}

impl<T: Real> EnergyReport<T> {
    pub fn total_energy(&self) -> Vec<T> {
        self.kinetic
            .iter()
            .zip(&self.potential)
            .map(|(k, p)| *k + *p)
            .collect()
    }
}

pub fn energy_report<T: Real>(
    u: &TimeSeriesField<T>,
    f: &TimeSeriesField<T>,
    s: FractionalOrder<T>,
) -> Result<EnergyReport<T>> {
    u.check_compatible(f)?;
    let nt = u.n_times();
    let dt = u.time.dt();
    let lambda = u.basis.eigenvalues();
    let d = fractional_multipliers(lambda, s);
    let c = &u.coeffs;
    let half = T::lit(0.5);
    let mut kinetic = vec![T::zero(); nt];
    let mut potential = vec![T::zero(); nt];
    let mut damping_integral = vec![T::zero(); nt];
    let mut source_integral = vec![T::zero(); nt];
    let fsq: Vec<T> = (0..nt)
        .map(|n| f.coeffs.row(n).dot(&f.coeffs.row(n)))
        .collect();
    for n in 1..nt {
        let (mut ke, mut pe) = (T::zero(), T::zero());
        for k in 0..lambda.len() {
            let delta = (c[[n, k]] - c[[n - 1, k]]) / dt;
            let avg = (c[[n, k]] + c[[n - 1, k]]) * half;
            ke += (T::one() - lambda[k] * dt * dt / T::lit(4.0)) * delta * delta;
            pe += lambda[k] * avg * avg;
        }
        kinetic[n] = ke;
        potential[n] = pe;
        source_integral[n] = source_integral[n - 1] + half * dt * (fsq[n - 1] + fsq[n]);
        if n >= 2 {
            let j = n - 1;
            let mut damp = T::zero();
            for k in 0..lambda.len() {
                let vc = (c[[j + 1, k]] - c[[j - 1, k]]) / (T::lit(2.0) * dt);
                damp += d[k] * vc * vc;
            }
            damping_integral[n] = damping_integral[n - 1] + dt * damp;
        }
    }
    let ratio = (1..nt)
        .filter(|&n| source_integral[n] > T::zero())
        .map(|n| (kinetic[n] + potential[n] + damping_integral[n]) / source_integral[n])
        .fold(T::zero(), T::max);
    Ok(EnergyReport {
        time: (0..nt).map(|n| u.time.time(n)).collect(),
        kinetic,
        potential,
        damping_integral,
        source_integral,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{solve_linear, SolveConfig};
    use crate::spectral::{build_basis, DomainSpec, GridSeries, TimeGrid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn zero_fields_zero_report() {
        let b = Arc::new(build_basis(&DomainSpec::interval(PI, 8).unwrap()).unwrap());
        let z = TimeSeriesField::zeros(b, TimeGrid::new(1.0, 10).unwrap());
        let r = energy_report(&z, &z, FractionalOrder::new(0.5).unwrap()).unwrap();
        assert!(r
            .kinetic
            .iter()
            .chain(&r.potential)
            .chain(&r.damping_integral)
            .all(|v| *v == 0.0));
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn energy_balance_with_damping() {
        let b = Arc::new(build_basis(&DomainSpec::interval(PI, 32).unwrap()).unwrap());
        let cfg = SolveConfig::new(TimeGrid::new(4.0, 400).unwrap());
        let s = FractionalOrder::new(0.5).unwrap();
        let f = GridSeries::from_fn(b.domain().clone(), cfg.time, |x, t| {
            if t < 1.0 {
                (-(x[0] - 1.5).powi(2) * 6.0).exp() * (PI * t).sin()
            } else {
                0.0
            }
        })
        .to_spectral(&b)
        .unwrap();
        let u = solve_linear(&f, s, &cfg).unwrap();
        let r = energy_report(&u, &f, s).unwrap();
        let e = r.total_energy();
        // once the source is off, E[n+1] + 2 (D[n+1] - D[n]) = E[n] exactly
        for n in 110..400 {
            let bal = e[n + 1] - e[n] + 2.0 * (r.damping_integral[n + 1] - r.damping_integral[n]);
            assert!(bal.abs() < 1e-12 * e[n].max(1e-300) + 1e-15, "{n}: {bal}");
            assert!(e[n + 1] <= e[n] + 1e-14);
        }
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
    }
}
