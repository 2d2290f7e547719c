use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{solve_nonlinear_sampled, SolveConfig};
use crate::kappa::{KappaField, KappaSamples};
use crate::real::Real;
use crate::spectral::{FractionalOrder, TimeSeriesField};
use crate::vector::Vector;

use super::{MeasurementWindow, RestrictedSeries};

/// Finite-difference estimate of a derivative of the solution with respect to
/// source amplitude.
#[derive(Debug, Clone)]
pub struct LinearizationResult<T, S> {
    /// Best estimate: Richardson-extrapolated for first linearizations, the
    /// plain difference quotient at the requested amplitudes for cross ones.
    pub field: S,
    /// Amplitude levels (for cross linearizations, the `eps1` of each level).
    pub epsilons: Vec<T>,
    /// Raw difference quotient at each level.
    pub estimates: Vec<S>,
    /// Estimated leading-order error of the raw quotient at the requested
    /// (for first linearizations: smallest) amplitude.
    pub richardson_error: T,
    /// `false` when the level differences do not decay as expected.
    pub converged: bool,
}

/// Four-point cross difference or its symmetrized `+-eps` variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossStencil {
    Plain,
    Symmetric,
}

/// Solves the nonlinear problem for many sources and observes the results.
pub(crate) struct Forward<'a, T: Real> {
    pub kappa: &'a KappaSamples<T>,
    pub s: FractionalOrder<T>,
    pub cfg: &'a SolveConfig<T>,
}

impl<T: Real> Forward<'_, T> {
    pub fn solve(&self, f: &TimeSeriesField<T>) -> Result<TimeSeriesField<T>> {
        Ok(solve_nonlinear_sampled(self.kappa, f, self.s, self.cfg)?.u)
    }

    /// Solves for every source in parallel; output order matches input order.
    fn solve_all<S: Vector<T> + Send>(
        &self,
        sources: &[TimeSeriesField<T>],
        observe: &(dyn Fn(TimeSeriesField<T>) -> Result<S> + Sync),
    ) -> Result<Vec<S>> {
        sources
            .par_iter()
            .map(|f| observe(self.solve(f)?))
            .collect()
    }
}

fn check_eps<T: Real>(eps: &[T]) -> Result<Vec<T>> {
    if eps.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 amplitudes, got {}",
            eps.len()
        )));
    }
    if eps.iter().any(|e| !(*e > T::zero()) || !e.is_finite()) {
        return Err(Error::Config("amplitudes must be positive".into()));
    }
    let mut sorted = eps.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("amplitudes must be distinct".into()));
    }
    Ok(sorted)
}

pub(crate) fn first_generic<T: Real, S: Vector<T> + Send>(
    fw: &Forward<'_, T>,
    f: &TimeSeriesField<T>,
    eps: &[T],
    observe: &(dyn Fn(TimeSeriesField<T>) -> Result<S> + Sync),
) -> Result<LinearizationResult<T, S>> {
    let eps = check_eps(eps)?;
    let sources: Vec<TimeSeriesField<T>> = eps
        .iter()
        .flat_map(|&e| [f.scaled(e), f.scaled(-e)])
        .collect();
    let sols = fw.solve_all(&sources, observe)?;
    let two = T::lit(2.0);
    let estimates: Vec<S> = eps
        .iter()
        .zip(sols.chunks(2))
        .map(|(&e, pm)| pm[0].lin_comb(T::one() / (two * e), &pm[1], -T::one() / (two * e)))
        .collect();
    // D(eps) = w + c eps^2 + ..., eliminate c between consecutive levels
    let m = eps.len();
    let r2 = (eps[m - 2] / eps[m - 1]).powi(2);
    let field = estimates[m - 1].lin_comb(
        r2 / (r2 - T::one()),
        &estimates[m - 2],
        -T::one() / (r2 - T::one()),
    );
    let richardson_error = estimates[m - 1]
        .lin_comb(T::one(), &field, -T::one())
        .norm();
    let diffs: Vec<T> = estimates
        .windows(2)
        .map(|w| w[0].lin_comb(T::one(), &w[1], -T::one()).norm())
        .collect();
    let floor = T::lit(1e-9) * field.norm();
    let converged = richardson_error.is_finite()
        && (diffs.windows(2).all(|d| d[1] < d[0]) || diffs.iter().all(|d| *d <= floor));
    Ok(LinearizationResult {
        field,
        epsilons: eps,
        estimates,
        richardson_error,
        converged,
    })
}

pub(crate) fn cross_generic<T: Real, S: Vector<T> + Send>(
    fw: &Forward<'_, T>,
    f1: &TimeSeriesField<T>,
    f2: &TimeSeriesField<T>,
    eps1: T,
    eps2: T,
    stencil: CrossStencil,
    observe: &(dyn Fn(TimeSeriesField<T>) -> Result<S> + Sync),
) -> Result<LinearizationResult<T, S>> {
    f1.check_compatible(f2)?;
    check_eps(&[eps1, eps1 * T::lit(0.5)])?;
    check_eps(&[eps2, eps2 * T::lit(0.5)])?;
    let zero = fw.solve(&f1.scaled(T::zero()))?;
    if zero.max_abs() != T::zero() {
        return Err(Error::Hypothesis(
            "nonzero response to the zero source".into(),
        ));
    }
    let half = T::lit(0.5);
    let levels = [(eps1, eps2), (eps1 * half, eps2 * half)];
    let signs: &[(T, T, T)] = match stencil {
        CrossStencil::Plain => &[
            (T::one(), T::one(), T::one()),
            (T::one(), T::zero(), -T::one()),
            (T::zero(), T::one(), -T::one()),
        ],
        CrossStencil::Symmetric => &[
            (T::one(), T::one(), T::one()),
            (T::one(), -T::one(), -T::one()),
            (-T::one(), T::one(), -T::one()),
            (-T::one(), -T::one(), T::one()),
        ],
    };
    let denom = match stencil {
        CrossStencil::Plain => T::one(),
        CrossStencil::Symmetric => T::lit(4.0),
    };
    let sources: Vec<TimeSeriesField<T>> = levels
        .iter()
        .flat_map(|&(a, b)| {
            signs
                .iter()
                .map(move |&(s1, s2, _)| f1.lin_comb(s1 * a, f2, s2 * b))
        })
        .collect();
    let sols = fw.solve_all(&sources, observe)?;
    let estimates: Vec<S> = levels
        .iter()
        .zip(sols.chunks(signs.len()))
        .map(|(&(a, b), chunk)| {
            let scale = T::one() / (denom * a * b);
            let mut acc = chunk[0].scaled(signs[0].2 * scale);
            for (u, sg) in chunk.iter().zip(signs).skip(1) {
                acc = acc.lin_comb(T::one(), u, sg.2 * scale);
            }
            acc
        })
        .collect();
    // error ~ c eps (plain) or c eps^2 (symmetric); halving gives the constant
    let gap = estimates[0]
        .lin_comb(T::one(), &estimates[1], -T::one())
        .norm();
    let richardson_error = match stencil {
        CrossStencil::Plain => T::lit(2.0) * gap,
        CrossStencil::Symmetric => T::lit(4.0) / T::lit(3.0) * gap,
    };
    let size = estimates[0].norm().max(fw.cfg.picard_tol / (eps1 * eps2));
    let converged = richardson_error.is_finite() && richardson_error <= T::lit(0.01) * size;
    let field = estimates[0].clone();
    Ok(LinearizationResult {
        field,
        epsilons: levels.iter().map(|l| l.0).collect(),
        estimates,
        richardson_error,
        converged,
    })
}

fn identity<T: Real>(u: TimeSeriesField<T>) -> Result<TimeSeriesField<T>> {
    Ok(u)
}

/// Central difference `(u(eps) - u(-eps)) / 2eps` of the nonlinear solution
/// for each amplitude, Richardson-extrapolated across the two smallest.
pub fn first_linearization<T: Real>(
    kappa: &KappaField<T>,
    f: &TimeSeriesField<T>,
    eps: &[T],
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<LinearizationResult<T, TimeSeriesField<T>>> {
    let k = kappa.sample(f.basis.domain(), &f.time)?;
    let fw = Forward { kappa: &k, s, cfg };
    first_generic(&fw, f, eps, &identity)
}

/// [`first_linearization`] observed on the window only.
pub fn first_linearization_on<T: Real>(
    window: &MeasurementWindow,
    kappa: &KappaField<T>,
    f: &TimeSeriesField<T>,
    eps: &[T],
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<LinearizationResult<T, RestrictedSeries<T>>> {
    let k = kappa.sample(f.basis.domain(), &f.time)?;
    let fw = Forward { kappa: &k, s, cfg };
    first_generic(&fw, f, eps, &|u| window.restrict(&u))
}

/// Mixed second derivative of `eps1, eps2 -> u(eps1 f1 + eps2 f2)` at zero.
#[allow(clippy::too_many_arguments)]
pub fn cross_linearization<T: Real>(
    kappa: &KappaField<T>,
    f1: &TimeSeriesField<T>,
    f2: &TimeSeriesField<T>,
    eps1: T,
    eps2: T,
    stencil: CrossStencil,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<LinearizationResult<T, TimeSeriesField<T>>> {
    let k = kappa.sample(f1.basis.domain(), &f1.time)?;
    let fw = Forward { kappa: &k, s, cfg };
    cross_generic(&fw, f1, f2, eps1, eps2, stencil, &identity)
}

/// [`cross_linearization`] observed on the window only.
#[allow(clippy::too_many_arguments)]
pub fn cross_linearization_on<T: Real>(
    window: &MeasurementWindow,
    kappa: &KappaField<T>,
    f1: &TimeSeriesField<T>,
    f2: &TimeSeriesField<T>,
    eps1: T,
    eps2: T,
    stencil: CrossStencil,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<LinearizationResult<T, RestrictedSeries<T>>> {
    let k = kappa.sample(f1.basis.domain(), &f1.time)?;
    let fw = Forward { kappa: &k, s, cfg };
    cross_generic(&fw, f1, f2, eps1, eps2, stencil, &|u| window.restrict(&u))
}
