//! Minimal dense kernels for the verification-sized matrices.
//!
//! Structured covariances (identity, equicorrelated, block) never touch this
//! code in the hot path; it exists for `dense:` inputs and for cross-checking
//! the closed forms against a factorization-based route.

use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Build from row-major data; panics unless `data.len() == n²`.
    pub fn from_rows(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must have n² entries");
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n, "matrix-vector dimension mismatch");
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }
}

impl<T> std::ops::Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular Cholesky factor, L·Lᵀ = A.
///
/// On failure returns the 1-based index of the first non-positive-definite
/// leading minor, LAPACK-style.
pub fn cholesky<T: Real>(a: &SquareMatrix<T>) -> Result<SquareMatrix<T>, usize> {
    let n = a.n();
    let mut l = SquareMatrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if d <= T::zero() || !d.is_finite() {
            return Err(j + 1);
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// Solve L·y = b for lower-triangular L.
pub fn solve_lower<T: Real>(l: &SquareMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.n();
    assert_eq!(b.len(), n, "solve dimension mismatch");
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Solve Lᵀ·x = b for lower-triangular L.
pub fn solve_lower_transpose<T: Real>(l: &SquareMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.n();
    assert_eq!(b.len(), n, "solve dimension mismatch");
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s = s - l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// A⁻¹ from its Cholesky factor: two triangular solves per unit column.
pub fn inverse_from_cholesky<T: Real>(l: &SquareMatrix<T>) -> SquareMatrix<T> {
    let n = l.n();
    let mut inv = SquareMatrix::zeros(n);
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e[j] = T::one();
        let y = solve_lower(l, &e);
        let col = solve_lower_transpose(l, &y);
        e[j] = T::zero();
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    inv
}
