//! Dense linear algebra for the small systems the sampler solves.
//!
//! The fixed- and random-effect blocks are at most a handful of columns wide,
//! so a row-major square matrix with an in-place Cholesky is all that is
//! needed. The factorization reports the failing pivot, which the Gibbs
//! driver surfaces to the user.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds from nested rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::param(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `weight * a aᵀ`.
    pub fn add_outer(&mut self, a: &[T], weight: T) {
        debug_assert_eq!(a.len(), self.dim);
        for i in 0..self.dim {
            let wi = weight * a[i];
            for j in 0..self.dim {
                self.data[i * self.dim + j] = self.data[i * self.dim + j] + wi * a[j];
            }
        }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Lower-triangular Cholesky factor `L` with `L Lᵀ = self`.
    pub fn cholesky(&self) -> Result<Cholesky<T>> {
        let n = self.dim;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d = d - l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: d.to_f64().unwrap_or(f64::NAN),
                });
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Cholesky { dim: n, lower: l })
    }
}

impl<T> std::ops::Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.dim + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.dim + j]
    }
}

/// Cholesky factor of a symmetric positive-definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    dim: usize,
    lower: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l(&self, i: usize, j: usize) -> T {
        self.lower[i * self.dim + j]
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &[T]) -> Vec<T> {
        let n = self.dim;
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s = s - self.lower[i * n + k] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
        x
    }

    /// Solves `Lᵀ x = b`.
    pub fn solve_upper(&self, b: &[T]) -> Vec<T> {
        let n = self.dim;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s = s - self.lower[k * n + i] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
        x
    }

    /// Solves `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.solve_upper(&self.solve_lower(b))
    }
}
