use crate::error::{Error, Result};
use crate::real::Real;

/// Axis-aligned box `(0, L_1) x ... x (0, L_dim)` discretized by `n_interior`
/// equally spaced interior nodes per axis. Dirichlet nodes are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec<T> {
    lengths: Vec<T>,
    n_interior: Vec<usize>,
}

impl<T: Real> DomainSpec<T> {
    pub fn new(lengths: Vec<T>, n_interior: Vec<usize>) -> Result<Self> {
        let dim = lengths.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::Config(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if n_interior.len() != dim {
            return Err(Error::Config(format!(
                "{} interior node counts given for a {dim}-dimensional domain",
                n_interior.len()
            )));
        }
        if let Some(l) = lengths
            .iter()
            .find(|l| !(**l > T::zero()) || !l.is_finite())
        {
            return Err(Error::Config(format!(
                "axis length must be positive, got {l}"
            )));
        }
        if let Some(n) = n_interior.iter().find(|n| **n < 2) {
            return Err(Error::Config(format!(
                "need at least 2 interior nodes per axis, got {n}"
            )));
        }
        Ok(Self {
            lengths,
            n_interior,
        })
    }

    /// The interval `(0, length)` with `n` interior nodes.
    pub fn interval(length: T, n: usize) -> Result<Self> {
        Self::new(vec![length], vec![n])
    }

    pub fn rectangle(lengths: [T; 2], n: [usize; 2]) -> Result<Self> {
        Self::new(lengths.to_vec(), n.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn n_interior(&self) -> &[usize] {
        &self.n_interior
    }

    /// Total number of interior nodes.
    pub fn n_nodes(&self) -> usize {
        self.n_interior.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.lengths[axis] / T::from_usize_lossy(self.n_interior[axis] + 1)
    }

    /// Volume of one grid cell, the weight of the discrete L2 inner product.
    pub fn cell_volume(&self) -> T {
        (0..self.dim())
            .map(|d| self.spacing(d))
            .fold(T::one(), |a, b| a * b)
    }

    /// Coordinate of interior node `i` (0-based) along `axis`.
    pub fn coordinate(&self, axis: usize, i: usize) -> T {
        self.spacing(axis) * T::from_usize_lossy(i + 1)
    }

    /// Splits a flat (row-major) node index into per-axis indices.
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        match self.dim() {
            1 => [flat, 0],
            _ => [flat / self.n_interior[1], flat % self.n_interior[1]],
        }
    }

    /// Physical position of a flat node index, padded with zero for 1D.
    pub fn position(&self, flat: usize) -> [T; 2] {
        let idx = self.unflatten(flat);
        let mut p = [T::zero(); 2];
        for (d, slot) in p.iter_mut().enumerate().take(self.dim()) {
            *slot = self.coordinate(d, idx[d]);
        }
        p
    }

    /// Discrete L2 inner product of two nodal arrays.
    pub fn inner(&self, a: &[T], b: &[T]) -> T {
        self.cell_volume() * a.iter().zip(b).map(|(x, y)| *x * *y).sum::<T>()
    }
}

/// Uniform grid `t_n = n * dt`, `n = 0..=n_steps`, on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t_final: T,
    n_steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_final: T, n_steps: usize) -> Result<Self> {
        if !(t_final > T::zero()) || !t_final.is_finite() {
            return Err(Error::Config(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::Config("n_steps must be positive".into()));
        }
        Ok(Self { t_final, n_steps })
    }

    pub fn t_final(&self) -> T {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of time levels, `n_steps + 1`.
    pub fn n_times(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> T {
        self.t_final / T::from_usize_lossy(self.n_steps)
    }

    pub fn time(&self, n: usize) -> T {
        self.dt() * T::from_usize_lossy(n)
    }

    /// Trapezoid weight (without the `dt` factor) of level `n`.
    pub fn trapezoid_weight(&self, n: usize) -> T {
        if n == 0 || n == self.n_steps {
            T::lit(0.5)
        } else {
            T::one()
        }
    }

    /// Same interval with twice as many steps.
    pub fn refined(&self) -> Self {
        Self {
            t_final: self.t_final,
            n_steps: 2 * self.n_steps,
        }
    }
}
