use ndarray::{Array2, Zip};

use crate::error::Result;
use crate::forward::{solve_linear, SolveConfig};
use crate::kappa::KappaField;
use crate::real::Real;
use crate::spectral::{fractional_multipliers, FractionalOrder, TimeSeriesField, TimeStencil};

/// `2 d_t^2 (kappa w1 w2)`, the source of the equation satisfied by the mixed
/// second derivative of the solution.
pub fn second_order_source<T: Real>(
    kappa: &KappaField<T>,
    w1: &TimeSeriesField<T>,
    w2: &TimeSeriesField<T>,
) -> Result<TimeSeriesField<T>> {
    w1.check_compatible(w2)?;
    let k = kappa.sample(w1.basis.domain(), &w1.time)?;
    let mut prod = w1.to_grid_series().values;
    Zip::from(&mut prod)
        .and(&w2.to_grid_series().values)
        .and(&k.value)
        .for_each(|p, &b, &k| *p = *p * b * k);
    second_order_source_from_product(&prod, w1)
}

/// `2 d_t^2 p` for nodal `p = kappa w1 w2`, on the basis and grid of `like`.
pub(crate) fn second_order_source_from_product<T: Real>(
    prod: &Array2<T>,
    like: &TimeSeriesField<T>,
) -> Result<TimeSeriesField<T>> {
    let d2 = TimeStencil::second_derivative(like.time)?.apply(prod) * T::lit(2.0);
    Ok(TimeSeriesField {
        coeffs: like.basis.analyze_rows(d2.view())?,
        ..like.clone()
    })
}

/// Consistency check of a candidate `v` against the linear equation with
/// source [`second_order_source`].
#[derive(Debug, Clone)]
pub struct VEquationCheck<T> {
    /// Space-time norm of `v_tt - Delta v + d_t (-Delta)^s v - 2 d_t^2 (kappa w1 w2)`
    /// with second-order difference quotients in time.
    pub residual: T,
    /// Direct solve of the equation.
    pub direct: TimeSeriesField<T>,
    /// `|v - direct|`
    pub distance: T,
}

pub fn verify_v_equation<T: Real>(
    v: &TimeSeriesField<T>,
    kappa: &KappaField<T>,
    w1: &TimeSeriesField<T>,
    w2: &TimeSeriesField<T>,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<VEquationCheck<T>> {
    v.check_compatible(w1)?;
    let src = second_order_source(kappa, w1, w2)?;
    let lambda = v.basis.eigenvalues();
    let d = fractional_multipliers(lambda, s);
    let vtt = TimeStencil::second_derivative(v.time)?.apply(&v.coeffs);
    let vt = TimeStencil::first_derivative(v.time)?.apply(&v.coeffs);
    let res = vtt + &(&v.coeffs * lambda) + &(vt * &d) - &src.coeffs;
    let residual = TimeSeriesField {
        coeffs: res,
        ..v.clone()
    }
    .norm();
    let direct = solve_linear(&src, s, cfg)?;
    let distance = v.lin_comb(T::one(), &direct, -T::one()).norm();
    Ok(VEquationCheck {
        residual,
        direct,
        distance,
    })
}
