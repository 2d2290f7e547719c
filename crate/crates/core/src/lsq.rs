//! Tikhonov-regularized least squares by conjugate gradients on the normal
//! equations (CGLS), for operators given only through `apply` and `adjoint`.

use crate::error::{Error, Result};
use crate::real::Real;
use crate::vector::Vector;

/// A linear operator between inner-product spaces together with its adjoint.
pub trait LinearMap<T: Real> {
    type Domain: Vector<T>;
    type Range: Vector<T>;

    fn apply(&self, x: &Self::Domain) -> Result<Self::Range>;
    fn adjoint(&self, y: &Self::Range) -> Result<Self::Domain>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig<T> {
    pub max_iter: usize,
    /// Stop once `|(A*A + alpha) x - A*b| <= tol |A*b|`.
    pub tol: T,
}

impl<T: Real> CgConfig<T> {
    pub fn new(max_iter: usize, tol: T) -> Result<Self> {
        if max_iter == 0 || !(tol > T::zero()) {
            return Err(Error::Config(format!(
                "invalid CG settings: max_iter {max_iter}, tol {tol}"
            )));
        }
        Ok(Self { max_iter, tol })
    }
}

#[derive(Debug, Clone)]
pub struct LsqSolution<T, X> {
    pub x: X,
    /// `|A x - b|` before the first and after every iteration.
    pub residual_history: Vec<T>,
    /// `|(A*A + alpha) x - A*b| / |A*b|` of the returned iterate.
    pub normal_residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `|A x - b|^2 + alpha |x|^2` starting from `x = 0`. On reaching
/// `max_iter` the iterate with the smallest normal-equation residual is
/// returned with `converged = false`.
pub fn tikhonov_cgls<T: Real, M: LinearMap<T>>(
    map: &M,
    b: &M::Range,
    alpha: T,
    cfg: &CgConfig<T>,
) -> Result<LsqSolution<T, M::Domain>> {
    if alpha < T::zero() {
        return Err(Error::Config(format!(
            "regularization must be nonnegative, got {alpha}"
        )));
    }
    let atb = map.adjoint(b)?;
    let atb_norm = atb.norm();
    let mut x = atb.zeros_like();
    let mut residual_history = vec![b.norm()];
    if atb_norm == T::zero() {
        return Ok(LsqSolution {
            x,
            residual_history,
            normal_residual: T::zero(),
            iterations: 0,
            converged: true,
        });
    }
    let mut r = b.clone();
    let mut s = atb;
    let mut p = s.clone();
    let mut gamma = s.inner(&s);
    let mut best = (T::one(), x.clone());
    for it in 1..=cfg.max_iter {
        let q = map.apply(&p)?;
        let delta = q.inner(&q) + alpha * p.inner(&p);
        if !(delta > T::zero()) {
            break;
        }
        let a = gamma / delta;
        x = x.lin_comb(T::one(), &p, a);
        r = r.lin_comb(T::one(), &q, -a);
        residual_history.push(r.norm());
        s = map.adjoint(&r)?.lin_comb(T::one(), &x, -alpha);
        let gamma_new = s.inner(&s);
        let rel = gamma_new.sqrt() / atb_norm;
        if rel < best.0 {
            best = (rel, x.clone());
        }
        if rel <= cfg.tol {
            return Ok(LsqSolution {
                x,
                residual_history,
                normal_residual: rel,
                iterations: it,
                converged: true,
            });
        }
        p = s.lin_comb(T::one(), &p, gamma_new / gamma);
        gamma = gamma_new;
    }
    Ok(LsqSolution {
        x: best.1,
        residual_history,
        normal_residual: best.0,
        iterations: cfg.max_iter,
        converged: false,
    })
}
