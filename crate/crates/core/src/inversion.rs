//! Recovery of `kappa` from cross-linearized window data, and a numerical
//! replay of the uniqueness argument.

use std::sync::Arc;

use ndarray::{Array2, Zip};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{solve_dual_linear, solve_linear, solve_nonlinear_sampled, SolveConfig};
use crate::kappa::{KappaBasis, KappaField};
use crate::lsq::{tikhonov_cgls, CgConfig, LinearMap};
use crate::real::Real;
use crate::runge::{runge_pair_for_inversion, RungeSolution};
use crate::spectral::{
    fractional_multipliers, EigenBasis, FractionalOrder, GridSeries, TimeSeriesField, TimeStencil,
};
use crate::sts::{
    cross_generic, second_order_source_from_product, CrossStencil, Forward, MeasurementWindow,
    RestrictedSeries,
};
use crate::vector::{Stack, Vector};

/// Sources, their linear responses and the cross-linearized data on `W`.
#[derive(Debug, Clone)]
pub struct PairDatum<T> {
    pub f1: TimeSeriesField<T>,
    pub f2: TimeSeriesField<T>,
    pub w1: TimeSeriesField<T>,
    pub w2: TimeSeriesField<T>,
    pub v_measured: RestrictedSeries<T>,
    pub richardson_error: T,
    pub converged: bool,
}

impl<T: Real> PairDatum<T> {
    /// Nodal `w1 w2`.
    fn product(&self) -> Array2<T> {
        let mut p = self.w1.to_grid_series().values;
        Zip::from(&mut p)
            .and(&self.w2.to_grid_series().values)
            .for_each(|a, &b| *a *= b);
        p
    }
}

/// Linear map `kappa coefficients -> (v|_W per pair)`, `v` solving the linear
/// problem with source `2 d_t^2 (kappa w1 w2)`.
pub struct KappaForwardMap<'a, T: Real> {
    basis: Arc<EigenBasis<T>>,
    kappa_basis: &'a KappaBasis,
    window_nodes: Arc<Vec<usize>>,
    products: Vec<Array2<T>>,
    templates: Vec<TimeSeriesField<T>>,
    s: FractionalOrder<T>,
    cfg: &'a SolveConfig<T>,
}

impl<'a, T: Real> KappaForwardMap<'a, T> {
    pub fn new(
        data: &[PairDatum<T>],
        kappa_basis: &'a KappaBasis,
        window: &MeasurementWindow,
        s: FractionalOrder<T>,
        cfg: &'a SolveConfig<T>,
    ) -> Result<Self> {
        let first = data
            .first()
            .ok_or_else(|| Error::Config("need at least one pair".into()))?;
        window.check_domain(first.w1.basis.domain())?;
        for d in data {
            first.w1.check_compatible(&d.w1)?;
            first.w1.check_compatible(&d.w2)?;
        }
        Ok(Self {
            basis: first.w1.basis.clone(),
            kappa_basis,
            window_nodes: Arc::new(window.nodes()),
            products: data.par_iter().map(PairDatum::product).collect(),
            templates: data.iter().map(|d| d.w1.clone()).collect(),
            s,
            cfg,
        })
    }

    pub fn zero_coeffs(&self) -> Vec<T> {
        vec![T::zero(); self.kappa_basis.len()]
    }
}

impl<T: Real> LinearMap<T> for KappaForwardMap<'_, T> {
    type Domain = Vec<T>;
    type Range = Stack<RestrictedSeries<T>>;

    fn apply(&self, c: &Vec<T>) -> Result<Self::Range> {
        let domain = self.basis.domain();
        let kappa = self.kappa_basis.expand(c, domain, &self.cfg.time)?.values;
        let out = self
            .products
            .par_iter()
            .zip(&self.templates)
            .map(|(p, like)| {
                let src = second_order_source_from_product(&(&kappa * p), like)?;
                let v = solve_linear(&src, self.s, self.cfg)?;
                Ok(RestrictedSeries::from_grid(
                    &v.to_grid_series(),
                    self.window_nodes.clone(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Stack(out))
    }

    fn adjoint(&self, r: &Self::Range) -> Result<Vec<T>> {
        let domain = self.basis.domain();
        let d2 = TimeStencil::second_derivative(self.cfg.time)?;
        let parts = self
            .products
            .par_iter()
            .zip(&r.0)
            .map(|(p, ri)| {
                let g = ri.to_spectral(&self.basis)?;
                let v = solve_dual_linear(&g, self.s, self.cfg)?;
                let y = v.to_grid_series().values;
                Ok(d2.apply_adjoint(&y) * T::lit(2.0) * p)
            })
            .collect::<Result<Vec<Array2<T>>>>()?;
        let mut total = Array2::zeros(parts[0].raw_dim());
        for p in &parts {
            total += p;
        }
        let g = GridSeries::new(domain.clone(), self.cfg.time, total)?;
        Ok(self.kappa_basis.adjoint(&g))
    }
}

/// `kappa coefficients -> v|_W` for one pair.
pub fn kappa_forward_map<T: Real>(
    coeffs: &[T],
    kappa_basis: &KappaBasis,
    pair: &PairDatum<T>,
    window: &MeasurementWindow,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<RestrictedSeries<T>> {
    let map = KappaForwardMap::new(std::slice::from_ref(pair), kappa_basis, window, s, cfg)?;
    Ok(map.apply(&coeffs.to_vec())?.0.remove(0))
}

/// Runs the cross-linearization against the nonlinear forward model of
/// `kappa_true`, observing only on `W`, for every source pair in parallel.
pub fn collect_pair_data<T: Real>(
    kappa_true: &KappaField<T>,
    sources: &[(TimeSeriesField<T>, TimeSeriesField<T>)],
    eps: T,
    stencil: CrossStencil,
    window: &MeasurementWindow,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<Vec<PairDatum<T>>> {
    let Some((first, _)) = sources.first() else {
        return Ok(Vec::new());
    };
    let k = kappa_true.sample(first.basis.domain(), &first.time)?;
    let fw = Forward { kappa: &k, s, cfg };
    sources
        .par_iter()
        .map(|(f1, f2)| {
            let lin = cross_generic(&fw, f1, f2, eps, eps, stencil, &|u| window.restrict(&u))?;
            Ok(PairDatum {
                f1: f1.clone(),
                f2: f2.clone(),
                w1: solve_linear(f1, s, cfg)?,
                w2: solve_linear(f2, s, cfg)?,
                v_measured: lin.field,
                richardson_error: lin.richardson_error,
                converged: lin.converged,
            })
        })
        .collect()
}

/// Replaces the measured data by the exact linearized model of `kappa`
/// (the inverse-crime setting).
pub fn synthetic_pair_data<T: Real>(
    kappa: &KappaField<T>,
    sources: &[(TimeSeriesField<T>, TimeSeriesField<T>)],
    window: &MeasurementWindow,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<Vec<PairDatum<T>>> {
    sources
        .par_iter()
        .map(|(f1, f2)| {
            let w1 = solve_linear(f1, s, cfg)?;
            let w2 = solve_linear(f2, s, cfg)?;
            let v = solve_linear(&crate::sts::second_order_source(kappa, &w1, &w2)?, s, cfg)?;
            Ok(PairDatum {
                f1: f1.clone(),
                f2: f2.clone(),
                v_measured: window.restrict(&v)?,
                w1,
                w2,
                richardson_error: T::zero(),
                converged: true,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult<T> {
    pub kappa_est: KappaField<T>,
    pub coeffs: Vec<T>,
    /// `|F(kappa_est) - v_measured|` per pair.
    pub data_misfit: Vec<T>,
    /// Relative normal-equation residual of the returned coefficients.
    pub gradient_norm: T,
    pub cg_residual_history: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Tikhonov least squares for the `kappa` coefficients over all pairs.
pub fn reconstruct_kappa<T: Real>(
    data: &[PairDatum<T>],
    kappa_basis: &KappaBasis,
    window: &MeasurementWindow,
    alpha: T,
    cg: &CgConfig<T>,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
) -> Result<ReconstructionResult<T>> {
    let map = KappaForwardMap::new(data, kappa_basis, window, s, cfg)?;
    let total: usize = data.iter().map(|d| d.v_measured.values.len()).sum();
    if kappa_basis.len() > total {
        return Err(Error::Config(format!(
            "kappa basis has {} functions but only {total} data values",
            kappa_basis.len()
        )));
    }
    let b = Stack(data.iter().map(|d| d.v_measured.clone()).collect());
    let sol = tikhonov_cgls(&map, &b, alpha, cg)?;
    let fitted = map.apply(&sol.x)?;
    let data_misfit = fitted
        .0
        .iter()
        .zip(&b.0)
        .map(|(f, m)| f.lin_comb(T::one(), m, -T::one()).norm())
        .collect();
    Ok(ReconstructionResult {
        kappa_est: KappaField::Coefficients {
            basis: kappa_basis.clone(),
            coeffs: sol.x.clone(),
        },
        coeffs: sol.x,
        data_misfit,
        gradient_norm: sol.normal_residual,
        cg_residual_history: sol.residual_history,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

/// `|a - b| / |b|` in space-time L2 over the given nodes (all nodes if `None`).
pub fn relative_l2_error<T: Real>(
    a: &KappaField<T>,
    b: &KappaField<T>,
    basis: &EigenBasis<T>,
    cfg: &SolveConfig<T>,
    nodes: Option<&[usize]>,
) -> Result<T> {
    let domain = basis.domain();
    let sa = a.sample(domain, &cfg.time)?.value_series(domain, &cfg.time);
    let sb = b.sample(domain, &cfg.time)?.value_series(domain, &cfg.time);
    let all: Vec<usize>;
    let nodes = match nodes {
        Some(n) => n,
        None => {
            all = (0..domain.n_nodes()).collect();
            &all
        }
    };
    let nodes = Arc::new(nodes.to_vec());
    let ra = RestrictedSeries::from_grid(&sa, nodes.clone());
    let rb = RestrictedSeries::from_grid(&sb, nodes);
    Ok(ra.lin_comb(T::one(), &rb, -T::one()).norm() / rb.norm())
}

/// Settings for the Runge-designed pairing in [`uniqueness_experiment`].
#[derive(Debug, Clone, Copy)]
pub struct PairingDesign<T> {
    pub alpha: T,
    pub cg: CgConfig<T>,
}

#[derive(Debug, Clone)]
pub struct PairingReport<T> {
    /// `int int (k1 - k2) w1 w2 phi`, with `w1 -> 1`, `w2 -> k1 - k2` designed
    /// off the window.
    pub pairing: T,
    /// The same quantity through `1/2 int int d_t^2((k1 - k2) w1 w2) (t - T)^2 phi`.
    pub pairing_by_parts: T,
    /// `int int (k1 - k2)^2 phi`
    pub target: T,
    pub residual_one: T,
    pub residual_difference: T,
}

#[derive(Debug, Clone)]
pub struct UniquenessReport<T> {
    /// `max |L1 f - L2 f|` over `W x (0, T)`, per source.
    pub map_difference: Vec<T>,
    /// `|d_t (-Delta)^s (u1 - u2)|` on `W`, per source.
    pub window_identity_residual: Vec<T>,
    pub pairing: Option<PairingReport<T>>,
}

/// Compares the source-to-solution maps of two coefficients that agree on
/// the window.
#[allow(clippy::too_many_arguments)]
pub fn uniqueness_experiment<T: Real>(
    kappa1: &KappaField<T>,
    kappa2: &KappaField<T>,
    sources: &[TimeSeriesField<T>],
    window: &MeasurementWindow,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
    design: Option<PairingDesign<T>>,
    basis: &Arc<EigenBasis<T>>,
) -> Result<UniquenessReport<T>> {
    let domain = basis.domain();
    window.check_domain(domain)?;
    let k1 = kappa1.sample(domain, &cfg.time)?;
    let k2 = kappa2.sample(domain, &cfg.time)?;
    let w_nodes = window.nodes();
    for n in 0..cfg.time.n_times() {
        for &j in &w_nodes {
            let gap = (k1.value[[n, j]] - k2.value[[n, j]]).abs();
            if gap > T::lit(1e-12) {
                return Err(Error::Hypothesis(format!(
                    "coefficients differ by {gap} inside the window (time level {n}, node {j})"
                )));
            }
        }
    }
    let d1 = TimeStencil::first_derivative(cfg.time)?;
    let mult = fractional_multipliers(basis.eigenvalues(), s);
    let rows = sources
        .par_iter()
        .map(|f| {
            let u1 = solve_nonlinear_sampled(&k1, f, s, cfg)?.u;
            let u2 = solve_nonlinear_sampled(&k2, f, s, cfg)?.u;
            let diff = u1.lin_comb(T::one(), &u2, -T::one());
            let map = window.restrict(&diff)?.max_abs();
            let ident = TimeSeriesField {
                coeffs: d1.apply(&diff.coeffs) * &mult,
                ..diff.clone()
            };
            Ok((map, window.restrict(&ident)?.norm()))
        })
        .collect::<Result<Vec<(T, T)>>>()?;
    let pairing = match design {
        None => None,
        Some(d) => Some(pairing_report(
            &k1.value, &k2.value, window, basis, s, cfg, d,
        )?),
    };
    Ok(UniquenessReport {
        map_difference: rows.iter().map(|r| r.0).collect(),
        window_identity_residual: rows.iter().map(|r| r.1).collect(),
        pairing,
    })
}

fn pairing_report<T: Real>(
    k1: &Array2<T>,
    k2: &Array2<T>,
    window: &MeasurementWindow,
    basis: &Arc<EigenBasis<T>>,
    s: FractionalOrder<T>,
    cfg: &SolveConfig<T>,
    design: PairingDesign<T>,
) -> Result<PairingReport<T>> {
    let domain = basis.domain();
    let time = cfg.time;
    let dk = k1 - k2;
    let dk_series = GridSeries::new(domain.clone(), time, dk.clone())?;
    let target_diff = RestrictedSeries::from_grid(&dk_series, Arc::new(window.complement()));
    let (r1, r2): (RungeSolution<T>, RungeSolution<T>) =
        runge_pair_for_inversion(&target_diff, basis, window, s, cfg, design.alpha, design.cg)?;
    let w1 = solve_linear(&r1.f, s, cfg)?.to_grid_series().values;
    let w2 = solve_linear(&r2.f, s, cfg)?.to_grid_series().values;
    let phi = basis.sample_mode(0);
    let tf = time.t_final();
    let weight = |values: Array2<T>| GridSeries::new(domain.clone(), time, values);
    let phi_grid = Array2::from_shape_fn(dk.raw_dim(), |(_, j)| phi[j]);
    let prod = &dk * &w1 * &w2;
    let pairing = weight(prod.clone())?.inner(&weight(phi_grid.clone())?);
    let target = weight(&dk * &dk)?.inner(&weight(phi_grid)?);
    let tilde = Array2::from_shape_fn(dk.raw_dim(), |(n, j)| (time.time(n) - tf).powi(2) * phi[j]);
    let dtt = TimeStencil::second_derivative(time)?.apply(&prod);
    let pairing_by_parts = T::lit(0.5) * weight(dtt)?.inner(&weight(tilde)?);
    Ok(PairingReport {
        pairing,
        pairing_by_parts,
        target,
        residual_one: r1.final_relative_residual,
        residual_difference: r2.final_relative_residual,
    })
}
