//! Gauss-Legendre rules and a panel-bisection adaptive integrator.

use crate::error::{Error, Result};
use crate::real::Real;

/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("quadrature needs at least one node".into()));
        }
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, a: T, b: T, f: &impl Fn(T) -> T) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let s: T = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| *w * f(mid + half * *x))
            .sum();
        s * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over `[a, b]` by bisecting panels until the rule on a panel
/// agrees with the rule on its two halves to `rel_tol` (relative to the
/// panel value). Returns the integral and the summed panel discrepancies.
pub fn adaptive<T: Real>(
    rule: &GaussLegendre<T>,
    a: T,
    b: T,
    f: &impl Fn(T) -> T,
    rel_tol: T,
    max_depth: usize,
) -> Result<(T, T)> {
    let mut total = T::zero();
    let mut err = T::zero();
    let mut failed = false;
    let mut stack = vec![(a, b, rule.integrate(a, b, f), 0usize)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = (lo + hi) * T::lit(0.5);
        let left = rule.integrate(lo, mid, f);
        let right = rule.integrate(mid, hi, f);
        let refined = left + right;
        let diff = (refined - whole).abs();
        if diff <= rel_tol * refined.abs() || diff <= T::min_positive_value() {
            total += refined;
            err += diff;
        } else if depth >= max_depth {
            failed = true;
            total += refined;
            err += diff;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    if failed {
        return Err(Error::Quadrature {
            achieved: (err / total.abs().max(T::min_positive_value())).to_f64_lossy(),
            requested: rel_tol.to_f64_lossy(),
        });
    }
    Ok((total, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let r = GaussLegendre::<f64>::new(5).unwrap();
        // degree 9 is integrated exactly by 5 nodes
        let v = r.integrate(0.0, 2.0, &|x| x.powi(9) + 3.0 * x * x);
        assert!((v - (2f64.powi(10) / 10.0 + 8.0)).abs() < 1e-12);
        let w: f64 = r.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rule_is_accurate() {
        let r = GaussLegendre::<f64>::new(64).unwrap();
        let v = r.integrate(0.0, std::f64::consts::PI, &|x| x.sin());
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_sharp_features() {
        let r = GaussLegendre::<f64>::new(16).unwrap();
        let (v, _) = adaptive(&r, 0.0, 1.0, &|x| (-1e4 * x).exp(), 1e-13, 60).unwrap();
        assert!((v - (1.0 - (-1e4f64).exp()) / 1e4).abs() < 1e-15);
        assert!(GaussLegendre::<f64>::new(0).is_err());
        let fail = adaptive(&r, 0.0, 1.0, &|x: f64| x.powf(-0.9), 1e-15, 2);
        assert!(matches!(fail, Err(Error::Quadrature { .. })));
    }
}
