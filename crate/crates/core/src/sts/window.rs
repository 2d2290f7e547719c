use std::ops::Range;
use std::sync::Arc;

use ndarray::{Array2, Axis};

use crate::error::{shape_err, Error, Result};
use crate::real::Real;
use crate::spectral::{DomainSpec, EigenBasis, GridSeries, TimeGrid, TimeSeriesField};
use crate::vector::Vector;

/// Observation set `W`: a box of grid nodes given by half-open index ranges
/// per axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementWindow {
    ranges: Vec<Range<usize>>,
    n_interior: Vec<usize>,
}

impl MeasurementWindow {
    pub fn new<T: Real>(domain: &DomainSpec<T>, ranges: Vec<Range<usize>>) -> Result<Self> {
        if ranges.len() != domain.dim() {
            return Err(Error::Config(format!(
                "window needs {} index ranges, got {}",
                domain.dim(),
                ranges.len()
            )));
        }
        for (axis, (r, &n)) in ranges.iter().zip(domain.n_interior()).enumerate() {
            if r.start >= r.end || r.end > n {
                return Err(Error::Config(format!(
                    "window range {r:?} on axis {axis} must be nonempty and within 0..{n}"
                )));
            }
        }
        if ranges
            .iter()
            .zip(domain.n_interior())
            .all(|(r, &n)| r.start == 0 && r.end == n)
        {
            return Err(Error::Config("window covers the whole grid".into()));
        }
        Ok(Self {
            ranges,
            n_interior: domain.n_interior().to_vec(),
        })
    }

    /// Nodes with `lower[d] < x_d < upper[d]` on every axis.
    pub fn from_box<T: Real>(domain: &DomainSpec<T>, lower: &[T], upper: &[T]) -> Result<Self> {
        if lower.len() != domain.dim() || upper.len() != domain.dim() {
            return Err(Error::Config("window box needs one bound per axis".into()));
        }
        let ranges = (0..domain.dim())
            .map(|d| {
                let inside: Vec<usize> = (0..domain.n_interior()[d])
                    .filter(|&i| {
                        let x = domain.coordinate(d, i);
                        x > lower[d] && x < upper[d]
                    })
                    .collect();
                match (inside.first(), inside.last()) {
                    (Some(&a), Some(&b)) => Ok(a..b + 1),
                    _ => Err(Error::Config(format!(
                        "window box contains no nodes on axis {d}"
                    ))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, ranges)
    }

    /// `(0, fraction * L_0)` along the first axis, everything along the others.
    pub fn left_fraction<T: Real>(domain: &DomainSpec<T>, fraction: T) -> Result<Self> {
        let mut lower = vec![T::zero(); domain.dim()];
        let mut upper = domain.lengths().to_vec();
        upper[0] = fraction * domain.lengths()[0];
        lower[0] = T::zero();
        Self::from_box(domain, &lower, &upper)
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn contains(&self, flat: usize) -> bool {
        let idx = if self.n_interior.len() == 1 {
            [flat, 0]
        } else {
            [flat / self.n_interior[1], flat % self.n_interior[1]]
        };
        self.ranges
            .iter()
            .enumerate()
            .all(|(d, r)| r.contains(&idx[d]))
    }

    /// Flat indices of the nodes in `W`, ascending.
    pub fn nodes(&self) -> Vec<usize> {
        (0..self.n_nodes_total())
            .filter(|&j| self.contains(j))
            .collect()
    }

    /// Flat indices of the nodes outside `W`, ascending.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.n_nodes_total())
            .filter(|&j| !self.contains(j))
            .collect()
    }

    fn n_nodes_total(&self) -> usize {
        self.n_interior.iter().product()
    }

    pub fn check_domain<T: Real>(&self, domain: &DomainSpec<T>) -> Result<()> {
        if domain.n_interior() != self.n_interior.as_slice() {
            return Err(shape_err(
                format!("{:?}", self.n_interior),
                format!("{:?}", domain.n_interior()),
            ));
        }
        Ok(())
    }

    /// Physical extent `[x_first, x_last]` of the window's nodes on `axis`.
    pub fn node_span<T: Real>(&self, domain: &DomainSpec<T>, axis: usize) -> (T, T) {
        let r = &self.ranges[axis];
        (
            domain.coordinate(axis, r.start),
            domain.coordinate(axis, r.end - 1),
        )
    }

    pub fn restrict<T: Real>(&self, u: &TimeSeriesField<T>) -> Result<RestrictedSeries<T>> {
        self.check_domain(u.basis.domain())?;
        Ok(RestrictedSeries::from_grid(
            &u.to_grid_series(),
            Arc::new(self.nodes()),
        ))
    }

    pub fn restrict_complement<T: Real>(
        &self,
        u: &TimeSeriesField<T>,
    ) -> Result<RestrictedSeries<T>> {
        self.check_domain(u.basis.domain())?;
        Ok(RestrictedSeries::from_grid(
            &u.to_grid_series(),
            Arc::new(self.complement()),
        ))
    }
}

/// Nodal values on a subset of the grid nodes at every time level.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedSeries<T> {
    pub time: TimeGrid<T>,
    pub nodes: Arc<Vec<usize>>,
    pub cell_volume: T,
    /// `(n_times, nodes.len())`
    pub values: Array2<T>,
}

impl<T: Real> RestrictedSeries<T> {
    pub fn zeros(time: TimeGrid<T>, nodes: Arc<Vec<usize>>, cell_volume: T) -> Self {
        let values = Array2::zeros((time.n_times(), nodes.len()));
        Self {
            time,
            nodes,
            cell_volume,
            values,
        }
    }

    pub fn from_grid(g: &GridSeries<T>, nodes: Arc<Vec<usize>>) -> Self {
        let values = g.values.select(Axis(1), &nodes);
        Self {
            time: g.time,
            nodes,
            cell_volume: g.domain.cell_volume(),
            values,
        }
    }

    /// Zero extension to the full grid.
    pub fn extend(&self, domain: &DomainSpec<T>) -> GridSeries<T> {
        let mut g = GridSeries::zeros(domain.clone(), self.time);
        for (c, &j) in self.nodes.iter().enumerate() {
            g.values.column_mut(j).assign(&self.values.column(c));
        }
        g
    }

    pub fn to_spectral(&self, basis: &Arc<EigenBasis<T>>) -> Result<TimeSeriesField<T>> {
        self.extend(basis.domain()).to_spectral(basis)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Zeroes the first and last time level, so the series is supported in
    /// the open interval `(0, T)`.
    pub fn mask_time_interior(&mut self) {
        let last = self.values.nrows() - 1;
        self.values.row_mut(0).fill(T::zero());
        self.values.row_mut(last).fill(T::zero());
    }
}

impl<T: Real> Vector<T> for RestrictedSeries<T> {
    fn lin_comb(&self, a: T, other: &Self, b: T) -> Self {
        let mut values = self.values.clone();
        values.zip_mut_with(&other.values, |x, y| *x = a * *x + b * *y);
        Self {
            values,
            ..self.clone()
        }
    }

    fn inner(&self, other: &Self) -> T {
        let mut acc = T::zero();
        for (n, (ra, rb)) in self
            .values
            .axis_iter(Axis(0))
            .zip(other.values.axis_iter(Axis(0)))
            .enumerate()
        {
            acc += self.time.trapezoid_weight(n) * ra.dot(&rb);
        }
        acc * self.time.dt() * self.cell_volume
    }
}
