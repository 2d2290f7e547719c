//! Sources supported in the window whose linear solutions approximate a
//! prescribed field outside it, by Tikhonov least squares with the exact
//! discrete adjoint (the dual solve).

use std::sync::Arc;

use crate::error::{shape_err, Error, Result};
use crate::forward::{solve_dual_linear, solve_linear, SolveConfig};
use crate::lsq::{tikhonov_cgls, CgConfig, LinearMap};
use crate::real::Real;
use crate::spectral::{EigenBasis, FractionalOrder, TimeSeriesField};
use crate::sts::{MeasurementWindow, RestrictedSeries};
use crate::vector::Vector;

/// `A f = solve_linear(M f)` restricted to the complement of `W`, where `M`
/// extends by zero from `W` and removes the levels `t = 0, T`.
pub struct RestrictionOperator<'a, T: Real> {
    pub basis: &'a Arc<EigenBasis<T>>,
    pub window: &'a MeasurementWindow,
    pub s: FractionalOrder<T>,
    pub cfg: &'a SolveConfig<T>,
    inside: Arc<Vec<usize>>,
    outside: Arc<Vec<usize>>,
}

impl<'a, T: Real> RestrictionOperator<'a, T> {
    pub fn new(
        basis: &'a Arc<EigenBasis<T>>,
        window: &'a MeasurementWindow,
        s: FractionalOrder<T>,
        cfg: &'a SolveConfig<T>,
    ) -> Result<Self> {
        window.check_domain(basis.domain())?;
        Ok(Self {
            basis,
            window,
            s,
            cfg,
            inside: Arc::new(window.nodes()),
            outside: Arc::new(window.complement()),
        })
    }

    pub fn zero_source(&self) -> RestrictedSeries<T> {
        RestrictedSeries::zeros(
            self.cfg.time,
            self.inside.clone(),
            self.basis.domain().cell_volume(),
        )
    }

    pub fn zero_target(&self) -> RestrictedSeries<T> {
        RestrictedSeries::zeros(
            self.cfg.time,
            self.outside.clone(),
            self.basis.domain().cell_volume(),
        )
    }

    fn check(&self, x: &RestrictedSeries<T>, nodes: &Arc<Vec<usize>>) -> Result<()> {
        if x.nodes != *nodes || x.time != self.cfg.time {
            return Err(shape_err(
                format!("{} nodes x {} levels", nodes.len(), self.cfg.time.n_times()),
                format!("{} nodes x {} levels", x.nodes.len(), x.time.n_times()),
            ));
        }
        Ok(())
    }

    /// The source field of a window series, after masking.
    pub fn source_field(&self, f: &RestrictedSeries<T>) -> Result<TimeSeriesField<T>> {
        self.check(f, &self.inside)?;
        let mut m = f.clone();
        m.mask_time_interior();
        m.to_spectral(self.basis)
    }
}

impl<T: Real> LinearMap<T> for RestrictionOperator<'_, T> {
    type Domain = RestrictedSeries<T>;
    type Range = RestrictedSeries<T>;

    fn apply(&self, f: &RestrictedSeries<T>) -> Result<RestrictedSeries<T>> {
        let u = solve_linear(&self.source_field(f)?, self.s, self.cfg)?;
        Ok(RestrictedSeries::from_grid(
            &u.to_grid_series(),
            self.outside.clone(),
        ))
    }

    fn adjoint(&self, g: &RestrictedSeries<T>) -> Result<RestrictedSeries<T>> {
        self.check(g, &self.outside)?;
        let v = solve_dual_linear(&g.to_spectral(self.basis)?, self.s, self.cfg)?;
        let mut out = RestrictedSeries::from_grid(&v.to_grid_series(), self.inside.clone());
        out.mask_time_interior();
        Ok(out)
    }
}

/// `A f`: the linear solution of the masked source, observed off `W`.
pub fn forward_restriction<T: Real>(
    f: &TimeSeriesField<T>,
    window: &MeasurementWindow,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<RestrictedSeries<T>> {
    let op = RestrictionOperator::new(&f.basis, window, s, cfg)?;
    op.apply(&window.restrict(f)?)
}

/// `A* g`: the dual solution of the zero-extended `g`, observed on `W`.
pub fn adjoint_restriction<T: Real>(
    g: &RestrictedSeries<T>,
    basis: &Arc<EigenBasis<T>>,
    window: &MeasurementWindow,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<RestrictedSeries<T>> {
    RestrictionOperator::new(basis, window, s, cfg)?.adjoint(g)
}

#[derive(Debug, Clone)]
pub struct RungeProblem<T> {
    /// Target on the complement of the window.
    pub target: RestrictedSeries<T>,
    pub window: MeasurementWindow,
    pub alpha: T,
    pub cg: CgConfig<T>,
}

#[derive(Debug, Clone)]
pub struct RungeSolution<T> {
    /// Designed source, supported in `W x (0, T)`.
    pub f: TimeSeriesField<T>,
    pub f_window: RestrictedSeries<T>,
    /// `|A f - g|` per CG iteration.
    pub residual_history: Vec<T>,
    /// `|A f - g| / |g|`, recomputed from the returned source.
    pub final_relative_residual: T,
    pub normal_residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `|A f - g|^2 + alpha |f|^2` over sources supported in the window.
pub fn design_source<T: Real>(
    p: &RungeProblem<T>,
    basis: &Arc<EigenBasis<T>>,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<RungeSolution<T>> {
    if !(p.alpha > T::zero()) {
        return Err(Error::Config(format!(
            "regularization must be positive, got {}",
            p.alpha
        )));
    }
    let op = RestrictionOperator::new(basis, &p.window, s, cfg)?;
    op.check(&p.target, &op.outside)?;
    let sol = tikhonov_cgls(&op, &p.target, p.alpha, &p.cg)?;
    let gnorm = p.target.norm();
    let final_relative_residual = if gnorm == T::zero() {
        T::zero()
    } else {
        op.apply(&sol.x)?
            .lin_comb(T::one(), &p.target, -T::one())
            .norm()
            / gnorm
    };
    Ok(RungeSolution {
        f: op.source_field(&sol.x)?,
        f_window: sol.x,
        residual_history: sol.residual_history,
        final_relative_residual,
        normal_residual: sol.normal_residual,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

/// Sources approximating `w1 = 1` and `w2 = difference` off the window.
pub fn runge_pair_for_inversion<T: Real>(
    difference: &RestrictedSeries<T>,
    basis: &Arc<EigenBasis<T>>,
    window: &MeasurementWindow,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
    alpha: T,
    cg: CgConfig<T>,
) -> Result<(RungeSolution<T>, RungeSolution<T>)> {
    let mut ones = difference.clone();
    ones.values.fill(T::one());
    let problem = |target: RestrictedSeries<T>| RungeProblem {
        target,
        window: window.clone(),
        alpha,
        cg,
    };
    let f1 = design_source(&problem(ones), basis, s, cfg)?;
    let f2 = design_source(&problem(difference.clone()), basis, s, cfg)?;
    Ok((f1, f2))
}
