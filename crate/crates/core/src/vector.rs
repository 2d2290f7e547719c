//! Minimal inner-product-space interface shared by the finite-difference
//! linearizations and the least-squares solvers.

use crate::real::Real;
use crate::spectral::{GridSeries, TimeSeriesField};

pub trait Vector<T: Real>: Clone {
    /// `a * self + b * other`.
    fn lin_comb(&self, a: T, other: &Self, b: T) -> Self;
    fn inner(&self, other: &Self) -> T;

    fn norm(&self) -> T {
        self.inner(self).sqrt()
    }

    fn scaled(&self, a: T) -> Self {
        self.lin_comb(a, self, T::zero())
    }

    fn zeros_like(&self) -> Self {
        self.scaled(T::zero())
    }
}

impl<T: Real> Vector<T> for TimeSeriesField<T> {
    fn lin_comb(&self, a: T, other: &Self, b: T) -> Self {
        TimeSeriesField::lin_comb(self, a, other, b)
    }

    fn inner(&self, other: &Self) -> T {
        TimeSeriesField::inner(self, other)
    }
}

impl<T: Real> Vector<T> for GridSeries<T> {
    fn lin_comb(&self, a: T, other: &Self, b: T) -> Self {
        let mut values = self.values.clone();
        values.zip_mut_with(&other.values, |x, y| *x = a * *x + b * *y);
        Self {
            values,
            ..self.clone()
        }
    }

    fn inner(&self, other: &Self) -> T {
        GridSeries::inner(self, other)
    }
}

/// Euclidean coefficient vectors.
impl<T: Real> Vector<T> for Vec<T> {
    fn lin_comb(&self, a: T, other: &Self, b: T) -> Self {
        self.iter()
            .zip(other)
            .map(|(x, y)| a * *x + b * *y)
            .collect()
    }

    fn inner(&self, other: &Self) -> T {
        self.iter().zip(other).map(|(x, y)| *x * *y).sum()
    }
}

/// Several vectors treated as one, with the summed inner product.
#[derive(Debug, Clone)]
pub struct Stack<V>(pub Vec<V>);

impl<T: Real, V: Vector<T>> Vector<T> for Stack<V> {
    fn lin_comb(&self, a: T, other: &Self, b: T) -> Self {
        Stack(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| x.lin_comb(a, y, b))
                .collect(),
        )
    }

    fn inner(&self, other: &Self) -> T {
        self.0.iter().zip(&other.0).map(|(x, y)| x.inner(y)).sum()
    }
}
