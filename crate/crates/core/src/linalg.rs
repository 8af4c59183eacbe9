//! Small dense complex matrices and vector helpers.
//!
//! The digital stage works with matrices no larger than the antenna count,
//! so a simple row-major `Vec` layout with Gauss-Jordan inversion is all
//! that is needed. Zero-dimensional matrices are legal and behave like
//! empty sums, which keeps degenerate configurations (no sensing beams)
//! free of special cases.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use num_complex::Complex;
use std::ops::{Index, IndexMut};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Build a matrix whose columns are the given vectors.
    pub fn from_cols(rows: usize, cols: &[Vec<Complex<T>>]) -> Self {
        for c in cols {
            assert_eq!(c.len(), rows, "column length mismatch");
        }
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in 0..self.cols {
                    acc = acc + self[(i, j)] * v[j];
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].scale(s))
    }

    /// Right-multiply by `diag(d)`: column `j` is scaled by `d[j]`.
    pub fn scale_cols_real(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.cols, "diagonal length mismatch");
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].scale(d[j]))
    }

    /// Left-multiply by `diag(d)`: row `i` is scaled by `d[i]`.
    pub fn scale_rows_real(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.rows, "diagonal length mismatch");
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].scale(d[i]))
    }

    /// Squared Frobenius norm.
    pub fn frob_sq(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// Invert by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Ok(Self::zeros(0, 0));
        }
        let mut a: Vec<Vec<Complex<T>>> = (0..n).map(|i| self.row_slice(i).to_vec()).collect();
        let mut inv: Vec<Vec<Complex<T>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Complex::new(T::one(), T::zero())
                        } else {
                            Complex::new(T::zero(), T::zero())
                        }
                    })
                    .collect()
            })
            .collect();

        let scale = self
            .data
            .iter()
            .fold(T::zero(), |m, z| m.max(z.norm_sqr()))
            .sqrt()
            .max(T::min_positive_value());
        let tol = scale * T::epsilon() * lit::<T>(n as f64);

        for col in 0..n {
            let mut pivot = col;
            let mut best = a[col][col].norm_sqr();
            for r in col + 1..n {
                let mag = a[r][col].norm_sqr();
                if mag > best {
                    best = mag;
                    pivot = r;
                }
            }
            if best.sqrt() <= tol {
                return Err(Error::SingularMatrix);
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);

            let d = a[col][col];
            for j in 0..n {
                a[col][j] = a[col][j] / d;
                inv[col][j] = inv[col][j] / d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[r][col];
                if factor.re == T::zero() && factor.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let ac = a[col][j];
                    let ic = inv[col][j];
                    a[r][j] = a[r][j] - factor * ac;
                    inv[r][j] = inv[r][j] - factor * ic;
                }
            }
        }

        Ok(Self::from_fn(n, n, |i, j| inv[i][j]))
    }

    fn row_slice(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl<T> Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Hermitian inner product `conj(a) . b`.
pub fn hdot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    assert_eq!(a.len(), b.len(), "inner product dimension mismatch");
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * *y
        })
}

/// Squared 2-norm of a complex vector.
pub fn norm_sq<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}
