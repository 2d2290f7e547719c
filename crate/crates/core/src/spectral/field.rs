//! Nodal and spectral representations of single snapshots and of space-time
//! series.

use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, Axis, Zip};

use crate::error::{shape_err, Error, Result};
use crate::real::Real;

use super::basis::EigenBasis;
use super::domain::{DomainSpec, TimeGrid};

/// Nodal values over the interior grid (Dirichlet zero on the boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    pub domain: DomainSpec<T>,
    pub values: Array1<T>,
}

impl<T: Real> GridField<T> {
    pub fn new(domain: DomainSpec<T>, values: Array1<T>) -> Result<Self> {
        if values.len() != domain.n_nodes() {
            return Err(shape_err(domain.n_nodes(), values.len()));
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn(domain: DomainSpec<T>, f: impl Fn([T; 2]) -> T) -> Self {
        let values = (0..domain.n_nodes())
            .map(|j| f(domain.position(j)))
            .collect();
        Self { domain, values }
    }

    /// Discrete L2 norm `(h sum u_j^2)^(1/2)`.
    pub fn l2_norm(&self) -> T {
        let v = self.values.as_slice().expect("contiguous");
        self.domain.inner(v, v).sqrt()
    }
}

/// Eigen-coefficients `<u, phi_k>` of one spatial field.
#[derive(Debug, Clone)]
pub struct SpectralField<T> {
    pub basis: Arc<EigenBasis<T>>,
    pub coeffs: Array1<T>,
}

impl<T: Real> SpectralField<T> {
    pub fn new(basis: Arc<EigenBasis<T>>, coeffs: Array1<T>) -> Result<Self> {
        if coeffs.len() != basis.n_modes() {
            return Err(shape_err(basis.n_modes(), coeffs.len()));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn zeros(basis: Arc<EigenBasis<T>>) -> Self {
        let n = basis.n_modes();
        Self {
            basis,
            coeffs: Array1::zeros(n),
        }
    }

    /// Unit coefficient vector `e_m`, i.e. the eigenfunction `phi_m`.
    pub fn unit(basis: Arc<EigenBasis<T>>, m: usize) -> Self {
        let mut f = Self::zeros(basis);
        f.coeffs[m] = T::one();
        f
    }

    pub fn l2_norm(&self) -> T {
        self.coeffs.dot(&self.coeffs).sqrt()
    }
}

/// Discrete sine transform of a nodal field.
pub fn to_spectral<T: Real>(
    g: &GridField<T>,
    basis: &Arc<EigenBasis<T>>,
) -> Result<SpectralField<T>> {
    if &g.domain != basis.domain() {
        return Err(shape_err(
            format!("{:?}", basis.domain()),
            format!("{:?}", g.domain),
        ));
    }
    Ok(SpectralField {
        basis: Arc::clone(basis),
        coeffs: basis.analyze(g.values.view()),
    })
}

/// Inverse transform, `sum_k c_k phi_k(x_j)`.
pub fn to_grid<T: Real>(c: &SpectralField<T>) -> GridField<T> {
    GridField {
        domain: c.basis.domain().clone(),
        values: c.basis.synthesize(c.coeffs.view()),
    }
}

fn check_time_rows(time: &TimeGrid<impl Real>, rows: usize) -> Result<()> {
    if rows != time.n_times() {
        return Err(shape_err(format!("{} time levels", time.n_times()), rows));
    }
    Ok(())
}

/// Space-time field: one spectral snapshot per time level, stored as a
/// `(n_times, n_modes)` coefficient array.
#[derive(Debug, Clone)]
pub struct TimeSeriesField<T> {
    pub basis: Arc<EigenBasis<T>>,
    pub time: TimeGrid<T>,
    pub coeffs: Array2<T>,
}

impl<T: Real> TimeSeriesField<T> {
    pub fn new(basis: Arc<EigenBasis<T>>, time: TimeGrid<T>, coeffs: Array2<T>) -> Result<Self> {
        check_time_rows(&time, coeffs.nrows())?;
        if coeffs.ncols() != basis.n_modes() {
            return Err(shape_err(basis.n_modes(), coeffs.ncols()));
        }
        Ok(Self {
            basis,
            time,
            coeffs,
        })
    }

    pub fn zeros(basis: Arc<EigenBasis<T>>, time: TimeGrid<T>) -> Self {
        let shape = (time.n_times(), basis.n_modes());
        Self {
            basis,
            time,
            coeffs: Array2::zeros(shape),
        }
    }

    /// Separable field `g(t) * c` for a fixed coefficient vector `c`.
    pub fn separable(spatial: &SpectralField<T>, time: TimeGrid<T>, g: impl Fn(T) -> T) -> Self {
        let coeffs = Array2::from_shape_fn((time.n_times(), spatial.basis.n_modes()), |(n, k)| {
            g(time.time(n)) * spatial.coeffs[k]
        });
        Self {
            basis: Arc::clone(&spatial.basis),
            time,
            coeffs,
        }
    }

    pub fn from_snapshots(time: TimeGrid<T>, snapshots: &[SpectralField<T>]) -> Result<Self> {
        check_time_rows(&time, snapshots.len())?;
        let basis = Arc::clone(&snapshots[0].basis);
        if snapshots.iter().any(|s| !Arc::ptr_eq(&s.basis, &basis)) {
            return Err(Error::Config("snapshots must share one basis".into()));
        }
        let mut coeffs = Array2::zeros((time.n_times(), basis.n_modes()));
        for (mut row, s) in coeffs.axis_iter_mut(Axis(0)).zip(snapshots) {
            row.assign(&s.coeffs);
        }
        Ok(Self {
            basis,
            time,
            coeffs,
        })
    }

    pub fn snapshot(&self, n: usize) -> SpectralField<T> {
        SpectralField {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.row(n).to_owned(),
        }
    }

    pub fn n_times(&self) -> usize {
        self.time.n_times()
    }

    /// Whether `other` lives on the same basis and time grid.
    pub fn compatible(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.basis, &other.basis) || self.basis.domain() == other.basis.domain())
            && self.time == other.time
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.compatible(other) {
            return Err(shape_err(
                format!("{:?} on {:?}", self.time, self.basis.domain()),
                format!("{:?} on {:?}", other.time, other.basis.domain()),
            ));
        }
        Ok(())
    }

    pub fn to_grid_series(&self) -> GridSeries<T> {
        GridSeries {
            domain: self.basis.domain().clone(),
            time: self.time,
            values: self
                .basis
                .synthesize_rows(self.coeffs.view())
                .expect("basis-consistent rows"),
        }
    }

    /// Space-time inner product `dt sum_n w_n sum_k a_k^n b_k^n` with
    /// trapezoid weights `w_n`. Equal to the nodal inner product by Parseval.
    pub fn inner(&self, other: &Self) -> T {
        trapezoid_rows(&self.time, &self.coeffs, &other.coeffs, T::one())
    }

    pub fn norm(&self) -> T {
        self.inner(self).sqrt()
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            coeffs: &self.coeffs * a,
            ..self.clone()
        }
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: T, other: &Self, b: T) -> Self {
        let mut coeffs = self.coeffs.clone();
        Zip::from(&mut coeffs)
            .and(&other.coeffs)
            .for_each(|x, y| *x = a * *x + b * *y);
        Self {
            coeffs,
            ..self.clone()
        }
    }

    /// Time-reversed series, level `n` -> level `N - n`.
    pub fn time_reversed(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.invert_axis(Axis(0));
        Self {
            coeffs: coeffs.as_standard_layout().to_owned(),
            ..self.clone()
        }
    }
}

/// Nodal space-time series, `(n_times, n_nodes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSeries<T> {
    pub domain: DomainSpec<T>,
    pub time: TimeGrid<T>,
    pub values: Array2<T>,
}

impl<T: Real> GridSeries<T> {
    pub fn new(domain: DomainSpec<T>, time: TimeGrid<T>, values: Array2<T>) -> Result<Self> {
        check_time_rows(&time, values.nrows())?;
        if values.ncols() != domain.n_nodes() {
            return Err(shape_err(domain.n_nodes(), values.ncols()));
        }
        Ok(Self {
            domain,
            time,
            values,
        })
    }

    pub fn zeros(domain: DomainSpec<T>, time: TimeGrid<T>) -> Self {
        let shape = (time.n_times(), domain.n_nodes());
        Self {
            domain,
            time,
            values: Array2::zeros(shape),
        }
    }

    /// Samples `f(x, t)` at every node and time level.
    pub fn from_fn(domain: DomainSpec<T>, time: TimeGrid<T>, f: impl Fn([T; 2], T) -> T) -> Self {
        let values = Array2::from_shape_fn((time.n_times(), domain.n_nodes()), |(n, j)| {
            f(domain.position(j), time.time(n))
        });
        Self {
            domain,
            time,
            values,
        }
    }

    pub fn to_spectral(&self, basis: &Arc<EigenBasis<T>>) -> Result<TimeSeriesField<T>> {
        if &self.domain != basis.domain() {
            return Err(shape_err(
                format!("{:?}", basis.domain()),
                format!("{:?}", self.domain),
            ));
        }
        Ok(TimeSeriesField {
            basis: Arc::clone(basis),
            time: self.time,
            coeffs: basis.analyze_rows(self.values.view())?,
        })
    }

    pub fn inner(&self, other: &Self) -> T {
        trapezoid_rows(
            &self.time,
            &self.values,
            &other.values,
            self.domain.cell_volume(),
        )
    }

    pub fn norm(&self) -> T {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

fn trapezoid_rows<T: Real>(time: &TimeGrid<T>, a: &Array2<T>, b: &Array2<T>, cell: T) -> T {
    let mut acc = T::zero();
    for (n, (ra, rb)) in a.axis_iter(Axis(0)).zip(b.axis_iter(Axis(0))).enumerate() {
        acc += time.trapezoid_weight(n) * ra.dot(&rb);
    }
    acc * time.dt() * cell
}

/// Discrete L2 norm of a nodal vector.
pub fn nodal_l2<T: Real>(domain: &DomainSpec<T>, v: ArrayView1<T>) -> T {
    (domain.cell_volume() * v.dot(&v)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::basis::build_basis;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn basis_1d(n: usize) -> Arc<EigenBasis<f64>> {
        Arc::new(build_basis(&DomainSpec::interval(PI, n).unwrap()).unwrap())
    }

    #[test]
    fn eigenfunction_has_unit_coefficient() {
        let b = basis_1d(9);
        let g = GridField::new(b.domain().clone(), b.sample_mode(0)).unwrap();
        let c = to_spectral(&g, &b).unwrap();
        assert!((c.coeffs[0] - 1.0).abs() < 1e-14);
        assert!(c.coeffs.iter().skip(1).all(|v| v.abs() < 1e-14));

        let z = GridField::new(b.domain().clone(), Array1::zeros(9)).unwrap();
        assert!(to_spectral(&z, &b)
            .unwrap()
            .coeffs
            .iter()
            .all(|v| *v == 0.0));
        assert!(to_grid(&SpectralField::zeros(b.clone()))
            .values
            .iter()
            .all(|v| *v == 0.0));
        let phi = to_grid(&SpectralField::unit(b.clone(), 0));
        assert!((&phi.values - &b.sample_mode(0))
            .iter()
            .all(|v| v.abs() < 1e-15));
    }

    // Direct summation oracles, independent of the matrix-product path.
    fn naive_synthesis(b: &EigenBasis<f64>, c: &[f64]) -> Vec<f64> {
        let d = b.domain();
        (0..d.n_nodes())
            .map(|j| {
                (0..c.len())
                    .map(|k| c[k] * b.eigenfunction(k, d.position(j)))
                    .sum()
            })
            .collect()
    }

    fn naive_analysis(b: &EigenBasis<f64>, g: &[f64]) -> Vec<f64> {
        let d = b.domain();
        (0..b.n_modes())
            .map(|k| {
                d.cell_volume()
                    * (0..g.len())
                        .map(|j| g[j] * b.eigenfunction(k, d.position(j)))
                        .sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn transforms_match_naive_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [
            DomainSpec::interval(PI, 12).unwrap(),
            DomainSpec::rectangle([1.0, 2.0], [5, 4]).unwrap(),
        ] {
            let b = Arc::new(build_basis(&d).unwrap());
            let c: Vec<f64> = (0..b.n_modes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g = to_grid(&SpectralField::new(b.clone(), Array1::from(c.clone())).unwrap());
            for (a, e) in g.values.iter().zip(naive_synthesis(&b, &c)) {
                assert!((a - e).abs() < 1e-13);
            }
            let smooth = GridField::from_fn(d.clone(), |x| {
                (x[0] * (3.0 - x[0])).sin() * (1.0 + x[1]).cos()
            });
            let c2 = to_spectral(&smooth, &b).unwrap();
            for (a, e) in c2
                .coeffs
                .iter()
                .zip(naive_analysis(&b, smooth.values.as_slice().unwrap()))
            {
                assert!((a - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_mismatched_domain() {
        let b = basis_1d(5);
        let g = GridField::new(DomainSpec::interval(1.0, 5).unwrap(), Array1::zeros(5)).unwrap();
        assert!(to_spectral(&g, &b).is_err());
        assert!(GridField::new(DomainSpec::interval(1.0, 5).unwrap(), array![1.0, 2.0]).is_err());
        assert!(SpectralField::new(b, array![1.0]).is_err());
    }

    #[test]
    fn series_inner_matches_nodal_inner() {
        let b = basis_1d(10);
        let tg = TimeGrid::new(1.0, 6).unwrap();
        let gs = GridSeries::from_fn(b.domain().clone(), tg, |x, t| x[0].sin() * (1.0 + t * t));
        let ts = gs.to_spectral(&b).unwrap();
        assert!((ts.norm() - gs.norm()).abs() < 1e-13 * gs.norm());
        let back = ts.to_grid_series();
        assert!((&back.values - &gs.values).iter().all(|v| v.abs() < 1e-13));
        let r = ts.time_reversed().time_reversed();
        assert_eq!(r.coeffs, ts.coeffs);
    }
}
