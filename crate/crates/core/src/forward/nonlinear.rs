use ndarray::{Array2, Zip};

use crate::error::{shape_err, Error, Result};
use crate::kappa::{KappaField, KappaSamples};
use crate::real::Real;
use crate::spectral::{zm_norm, FractionalOrder, TimeSeriesField, TimeStencil};

use super::linear::solve_linear;
use super::variable::{mass_defect, solve_with_defect};
use super::SolveConfig;

/// Outcome of the fixed-point iteration `v -> J(v)`.
#[derive(Debug, Clone)]
pub struct NonlinearSolveResult<T> {
    pub u: TimeSeriesField<T>,
    pub outer_iterations: usize,
    /// Discrete `Z^1` norm of `u[j+1] - u[j]`, one entry per iteration.
    pub residual_history: Vec<T>,
    /// Minimum over the grid of `1 - 2 kappa u`.
    pub coefficient_min: T,
}

impl<T: Real> NonlinearSolveResult<T> {
    /// Ratios of successive residuals.
    pub fn contraction_ratios(&self) -> Vec<T> {
        self.residual_history
            .windows(2)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// Right-hand side of the frozen-coefficient problem,
/// `f + 2 kappa v_t^2 + 4 kappa_t v v_t + kappa_tt v^2`.
pub fn picard_source<T: Real>(
    kappa: &KappaField<T>,
    v: &TimeSeriesField<T>,
    f: &TimeSeriesField<T>,
) -> Result<TimeSeriesField<T>> {
    f.check_compatible(v)?;
    let k = kappa.sample(f.basis.domain(), &f.time)?;
    picard_source_sampled(&k, &v.to_grid_series().values, f)
}

fn picard_source_sampled<T: Real>(
    k: &KappaSamples<T>,
    v: &Array2<T>,
    f: &TimeSeriesField<T>,
) -> Result<TimeSeriesField<T>> {
    let vt = TimeStencil::first_derivative(f.time)?.apply(v);
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    let mut extra = Array2::zeros(v.raw_dim());
    Zip::from(&mut extra)
        .and(v)
        .and(&vt)
        .and(&k.value)
        .and(&k.dt)
        .and(&k.dtt)
        .for_each(|e, &v, &vt, &k0, &k1, &k2| {
            *e = two * k0 * vt * vt + four * k1 * v * vt + k2 * v * v
        });
    let mut out = f.clone();
    out.coeffs += &f.basis.analyze_rows(extra.view())?;
    Ok(out)
}

/// Solves `d_t^2 (u - kappa u^2) - Delta u + d_t (-Delta)^s u = f` by Picard
/// iteration from `v = 0`, each step a variable-coefficient solve.
pub fn solve_nonlinear<T: Real>(
    kappa: &KappaField<T>,
    f: &TimeSeriesField<T>,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<NonlinearSolveResult<T>> {
    let k = kappa.sample(f.basis.domain(), &f.time)?;
    solve_nonlinear_sampled(&k, f, s, cfg)
}

pub(crate) fn solve_nonlinear_sampled<T: Real>(
    k: &KappaSamples<T>,
    f: &TimeSeriesField<T>,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<NonlinearSolveResult<T>> {
    cfg.validate()?;
    let shape = (f.n_times(), f.basis.domain().n_nodes());
    if k.value.dim() != shape {
        return Err(shape_err(
            format!("{shape:?}"),
            format!("{:?}", k.value.dim()),
        ));
    }
    if k.is_zero() {
        let u = solve_linear(f, s, cfg)?;
        return Ok(NonlinearSolveResult {
            u,
            outer_iterations: 1,
            residual_history: vec![T::zero()],
            coefficient_min: T::one(),
        });
    }
    let mut v = TimeSeriesField::zeros(f.basis.clone(), f.time);
    let mut v_grid = Array2::zeros(shape);
    let mut history: Vec<T> = Vec::new();
    let mut rising = 0;
    for it in 1..=cfg.picard_max_iter {
        let rhs = picard_source_sampled(k, &v_grid, f)?;
        let u = solve_with_defect(&mass_defect(&k.value, &v_grid), &rhs, s, cfg)?;
        let res = zm_norm(&u.lin_comb(T::one(), &v, -T::one()), 1)?;
        if !res.is_finite() {
            history.push(res);
            return Err(amplitude_error(&history));
        }
        if history.last().is_some_and(|&prev| res > prev) {
            rising += 1;
        } else {
            rising = 0;
        }
        history.push(res);
        v_grid = u.to_grid_series().values;
        v = u;
        if res <= cfg.picard_tol {
            let coefficient_min = mass_defect(&k.value, &v_grid)
                .iter()
                .fold(T::infinity(), |m, q| m.min(T::one() - *q));
            return Ok(NonlinearSolveResult {
                u: v,
                outer_iterations: it,
                residual_history: history,
                coefficient_min,
            });
        }
        if rising >= 3 {
            return Err(amplitude_error(&history));
        }
    }
    Err(Error::NotConverged {
        what: "Picard iteration",
        iterations: cfg.picard_max_iter,
        achieved: history.last().map_or(f64::NAN, |r| r.to_f64_lossy()),
        requested: cfg.picard_tol.to_f64_lossy(),
    })
}

fn amplitude_error<T: Real>(history: &[T]) -> Error {
    Error::AmplitudeTooLarge {
        history: history.iter().map(|r| r.to_f64_lossy()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::solve_variable_coefficient;
    use crate::spectral::{build_basis, DomainSpec, GridSeries, TimeGrid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn setup(amp: f64) -> (TimeSeriesField<f64>, SolveConfig<f64>) {
        let b = Arc::new(build_basis(&DomainSpec::interval(PI, 32).unwrap()).unwrap());
        let cfg = SolveConfig::new(TimeGrid::new(3.0, 200).unwrap());
        let f = GridSeries::from_fn(b.domain().clone(), cfg.time, |x, t| {
            amp * (-(x[0] - 1.2).powi(2) * 10.0).exp() * (2.0 * t).sin() * t
        })
        .to_spectral(&b)
        .unwrap();
        (f, cfg)
    }

    #[test]
    fn zero_kappa_is_one_linear_solve() {
        let (f, cfg) = setup(1.0);
        let s = FractionalOrder::new(0.5).unwrap();
        let r = solve_nonlinear(&KappaField::Constant(0.0), &f, s, &cfg).unwrap();
        assert_eq!(r.outer_iterations, 1);
        assert_eq!(r.u.coeffs, solve_linear(&f, s, &cfg).unwrap().coeffs);
    }

    #[test]
    fn converged_solution_is_fixed_point() {
        let (f, cfg) = setup(0.5);
        let s = FractionalOrder::new(0.5).unwrap();
        let kappa = KappaField::SinMode {
            amplitude: 0.4,
            mode: [1, 1],
        };
        let r = solve_nonlinear(&kappa, &f, s, &cfg).unwrap();
        assert!(r.outer_iterations > 2);
        assert!(r.coefficient_min < 1.0 && r.coefficient_min > 0.25);
        for q in r.contraction_ratios().iter().skip(1) {
            assert!(*q < 0.5, "{:?}", r.residual_history);
        }
        let src = picard_source(&kappa, &r.u, &f).unwrap();
        let again = solve_variable_coefficient(&kappa, &r.u, &src, s, &cfg).unwrap();
        let diff = zm_norm(&again.lin_comb(1.0, &r.u, -1.0), 1).unwrap();
        assert!(diff <= cfg.picard_tol, "{diff}");
    }

    #[test]
    fn nonlinearity_enters_at_second_order() {
        let s = FractionalOrder::new(0.5).unwrap();
        let kappa = KappaField::Constant(0.3);
        let dev = |amp: f64| {
            let (f, cfg) = setup(amp);
            let u = solve_nonlinear(&kappa, &f, s, &cfg).unwrap().u;
            let lin = solve_linear(&f, s, &cfg).unwrap();
            u.lin_comb(1.0, &lin, -1.0).norm() / lin.norm()
        };
        let (a, b) = (dev(0.2), dev(0.1));
        // relative deviation from linear response is first order in amplitude
        assert!((a / b - 2.0).abs() < 0.1, "{a} {b}");
    }

    #[test]
    fn large_amplitude_is_rejected() {
        let (f, cfg) = setup(40.0);
        let s = FractionalOrder::new(0.5).unwrap();
        let err = solve_nonlinear(&KappaField::Constant(0.5), &f, s, &cfg).unwrap_err();
        assert!(
            matches!(
                err,
                Error::AmplitudeTooLarge { .. } | Error::Degenerate { .. }
            ),
            "{err:?}"
        );
    }
}
