//! Dirichlet eigenbasis of a box and the discrete sine transforms that map
//! nodal values to eigen-coefficients and back.
//!
//! On `(0, L)` with `n` interior nodes `x_j = j L / (n + 1)` the sampled
//! eigenfunctions `phi_k(x_j) = sqrt(2/L) sin(k pi j / (n + 1))`, `k = 1..=n`,
//! are orthonormal for the inner product `h sum_j u_j v_j`, so the transform
//! pair is exact and Parseval holds to round-off. Box domains use the tensor
//! product, with modes flattened in non-decreasing eigenvalue order.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{shape_err, Result};
use crate::real::Real;

use super::domain::DomainSpec;

/// One Dirichlet eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode<T> {
    /// 1-based wave numbers per axis (unused axes are 0).
    pub index: [usize; 2],
    pub eigenvalue: T,
    /// Amplitude of the L2-normalized eigenfunction, `prod sqrt(2 / L_d)`.
    pub normalization: T,
}

#[derive(Debug, Clone)]
pub struct EigenBasis<T> {
    domain: DomainSpec<T>,
    modes: Vec<Mode<T>>,
    eigenvalues: Array1<T>,
    /// `sine[d][[k, j]] = sqrt(2/L_d) sin((k+1) pi (j+1) / (n_d+1))`
    sine: Vec<Array2<T>>,
    /// sorted mode position -> tensor (row-major) position
    order: Vec<usize>,
}

/// Eigenvalues and eigenfunctions of the Dirichlet Laplacian on the box.
pub fn build_basis<T: Real>(domain: &DomainSpec<T>) -> Result<EigenBasis<T>> {
    let domain = domain.clone();
    let dim = domain.dim();
    let pi = T::PI();

    let sine: Vec<Array2<T>> = (0..dim)
        .map(|d| {
            let n = domain.n_interior()[d];
            let amp = (T::lit(2.0) / domain.lengths()[d]).sqrt();
            let denom = T::from_usize_lossy(n + 1);
            Array2::from_shape_fn((n, n), |(k, j)| {
                // reduce (k+1)(j+1) mod 2(n+1) so the sine argument stays in [0, 2pi)
                let m = ((k + 1) * (j + 1)) % (2 * (n + 1));
                amp * (pi * T::from_usize_lossy(m) / denom).sin()
            })
        })
        .collect();

    let axis_eig = |d: usize, k: usize| -> T {
        let w = T::from_usize_lossy(k) * pi / domain.lengths()[d];
        w * w
    };

    let mut tensor_modes: Vec<Mode<T>> = Vec::with_capacity(domain.n_nodes());
    match dim {
        1 => {
            let amp = (T::lit(2.0) / domain.lengths()[0]).sqrt();
            for k in 1..=domain.n_interior()[0] {
                tensor_modes.push(Mode {
                    index: [k, 0],
                    eigenvalue: axis_eig(0, k),
                    normalization: amp,
                });
            }
        }
        _ => {
            let amp = (T::lit(2.0) / domain.lengths()[0]).sqrt()
                * (T::lit(2.0) / domain.lengths()[1]).sqrt();
            for k0 in 1..=domain.n_interior()[0] {
                for k1 in 1..=domain.n_interior()[1] {
                    tensor_modes.push(Mode {
                        index: [k0, k1],
                        eigenvalue: axis_eig(0, k0) + axis_eig(1, k1),
                        normalization: amp,
                    });
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..tensor_modes.len()).collect();
    // stable: ties keep tensor order
    order.sort_by(|&a, &b| {
        tensor_modes[a]
            .eigenvalue
            .partial_cmp(&tensor_modes[b].eigenvalue)
            .expect("finite eigenvalues")
    });
    let modes: Vec<Mode<T>> = order.iter().map(|&i| tensor_modes[i].clone()).collect();
    let eigenvalues = modes.iter().map(|m| m.eigenvalue).collect();

    Ok(EigenBasis {
        domain,
        modes,
        eigenvalues,
        sine,
        order,
    })
}

impl<T: Real> EigenBasis<T> {
    pub fn domain(&self) -> &DomainSpec<T> {
        &self.domain
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Eigenvalues in non-decreasing order.
    pub fn eigenvalues(&self) -> &Array1<T> {
        &self.eigenvalues
    }

    pub fn lambda_min(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> T {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Value of the normalized eigenfunction of sorted mode `m` at `x`.
    pub fn eigenfunction(&self, m: usize, x: [T; 2]) -> T {
        let mode = &self.modes[m];
        let mut v = mode.normalization;
        for (d, l) in self.domain.lengths().iter().enumerate() {
            let arg = T::from_usize_lossy(mode.index[d]) * T::PI() * x[d] / *l;
            v *= arg.sin();
        }
        v
    }

    /// Nodal samples of eigenfunction `m`.
    pub fn sample_mode(&self, m: usize) -> Array1<T> {
        let mut c = Array1::zeros(self.n_modes());
        c[m] = T::one();
        self.synthesize(c.view())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_modes() {
            return Err(shape_err(self.n_modes(), len));
        }
        Ok(())
    }

    /// Nodal values -> eigen-coefficients `<u, phi_k>_h`.
    pub fn analyze(&self, values: ArrayView1<T>) -> Array1<T> {
        match self.domain.dim() {
            1 => self.sine[0].dot(&values) * self.domain.spacing(0),
            _ => {
                let n = self.domain.n_interior();
                let g = values
                    .into_shape_with_order((n[0], n[1]))
                    .expect("nodal shape");
                let c = self.sine[0].dot(&g).dot(&self.sine[1].t()) * self.domain.cell_volume();
                let flat = c.as_standard_layout();
                let flat = flat.as_slice().expect("standard layout");
                self.order.iter().map(|&i| flat[i]).collect()
            }
        }
    }

    /// Eigen-coefficients -> nodal values `sum_k c_k phi_k(x_j)`.
    pub fn synthesize(&self, coeffs: ArrayView1<T>) -> Array1<T> {
        match self.domain.dim() {
            1 => self.sine[0].t().dot(&coeffs),
            _ => {
                let n = self.domain.n_interior();
                let mut tensor = vec![T::zero(); n[0] * n[1]];
                for (pos, &i) in self.order.iter().enumerate() {
                    tensor[i] = coeffs[pos];
                }
                let c = Array2::from_shape_vec((n[0], n[1]), tensor).expect("tensor shape");
                let g = self.sine[0].t().dot(&c).dot(&self.sine[1]);
                g.into_shape_with_order(n[0] * n[1])
                    .expect("flatten")
                    .to_owned()
            }
        }
    }

    /// Row-wise `analyze` for a time series stored as `(n_times, n_nodes)`.
    pub fn analyze_rows(&self, values: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_len(values.ncols())?;
        match self.domain.dim() {
            1 => Ok(values.dot(&self.sine[0].t()) * self.domain.spacing(0)),
            _ => {
                let mut out = Array2::zeros(values.raw_dim());
                for (mut o, row) in out.axis_iter_mut(Axis(0)).zip(values.axis_iter(Axis(0))) {
                    o.assign(&self.analyze(row));
                }
                Ok(out)
            }
        }
    }

    /// Row-wise `synthesize` for coefficient series `(n_times, n_modes)`.
    pub fn synthesize_rows(&self, coeffs: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_len(coeffs.ncols())?;
        match self.domain.dim() {
            1 => Ok(coeffs.dot(&self.sine[0])),
            _ => {
                let mut out = Array2::zeros(coeffs.raw_dim());
                for (mut o, row) in out.axis_iter_mut(Axis(0)).zip(coeffs.axis_iter(Axis(0))) {
                    o.assign(&self.synthesize(row));
                }
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn eig(d: &DomainSpec<f64>) -> Vec<f64> {
        build_basis(d).unwrap().eigenvalues().to_vec()
    }

    #[test]
    fn analytic_eigenvalues() {
        let l = eig(&DomainSpec::<f64>::interval(PI, 3).unwrap());
        for (a, b) in l.iter().zip([1.0, 4.0, 9.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let l = eig(&DomainSpec::<f64>::interval(1.0, 2).unwrap());
        assert!((l[0] - PI * PI).abs() < 1e-12 && (l[1] - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn box_eigenvalues_sorted() {
        let l = eig(&DomainSpec::<f64>::rectangle([PI, PI], [2, 2]).unwrap());
        for (a, b) in l.iter().zip([2.0, 5.0, 5.0, 8.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let l = eig(&DomainSpec::<f64>::rectangle([PI, PI], [3, 3]).unwrap());
        assert_eq!(l.len(), 9);
        for (a, b) in l
            .iter()
            .zip([2.0, 5.0, 5.0, 8.0, 10.0, 10.0, 13.0, 13.0, 18.0])
        {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn discrete_orthonormality() {
        for d in [
            DomainSpec::<f64>::interval(2.5, 7).unwrap(),
            DomainSpec::<f64>::rectangle([1.0, 2.0], [4, 5]).unwrap(),
        ] {
            let b = build_basis(&d).unwrap();
            let samples: Vec<_> = (0..b.n_modes()).map(|m| b.sample_mode(m)).collect();
            for i in 0..b.n_modes() {
                for j in 0..b.n_modes() {
                    let ip = d.inner(
                        samples[i].as_slice().unwrap(),
                        samples[j].as_slice().unwrap(),
                    );
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-13, "({i},{j}) {ip}");
                }
            }
        }
    }

    #[test]
    fn sampled_mode_matches_closed_form() {
        let d = DomainSpec::<f64>::rectangle([1.0, 2.0], [4, 5]).unwrap();
        let b = build_basis(&d).unwrap();
        for m in 0..b.n_modes() {
            let s = b.sample_mode(m);
            for j in 0..d.n_nodes() {
                assert!((s[j] - b.eigenfunction(m, d.position(j))).abs() < 1e-13);
            }
        }
    }
}
