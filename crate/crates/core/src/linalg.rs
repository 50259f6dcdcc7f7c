//! Small dense linear algebra over [`Real`] scalars.
//!
//! The matrices handled by this crate are tiny (tangent-space forms of
//! dimension at most a handful, doubled for product frames), so a row-major
//! `Vec` with cyclic Jacobi rotations for the symmetric eigenproblem is all
//! that is needed.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `vᵀ M w`.
    pub fn bilinear(&self, v: &[T], w: &[T]) -> T {
        dot(v, &self.matvec(w))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// `self + s·I`.
    pub fn shift(&self, s: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] = out[(i, i)] + s;
        }
        out
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| half * (self[(i, j)] + self[(j, i)]))
    }

    /// Sub-block `[r0, r0+nr) × [c0, c0+nc)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Block diagonal matrix `diag(a, b)`.
    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let n = a.rows + b.rows;
        let m = a.cols + b.cols;
        Self::from_fn(n, m, |i, j| {
            if i < a.rows && j < a.cols {
                a[(i, j)]
            } else if i >= a.rows && j >= a.cols {
                b[(i - a.rows, j - a.cols)]
            } else {
                T::zero()
            }
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix<T>,
}

/// Cyclic Jacobi eigen-solver for symmetric matrices.
///
/// Only the symmetric part of `m` is used.
pub fn sym_eigen<T: Real>(m: &Matrix<T>) -> SymEigen<T> {
    assert!(m.is_square(), "sym_eigen needs a square matrix");
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = Matrix::identity(n);
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let x = a[(i, j)] * a[(i, j)];
                total = total + x;
                if i != j {
                    off = off + x;
                }
            }
        }
        if off <= eps * eps * total || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymEigen { values, vectors }
}

pub fn sym_eigenvalues<T: Real>(m: &Matrix<T>) -> Vec<T> {
    sym_eigen(m).values
}

pub fn min_eigenvalue<T: Real>(m: &Matrix<T>) -> T {
    sym_eigenvalues(m).first().copied().unwrap_or(T::zero())
}

pub fn max_eigenvalue<T: Real>(m: &Matrix<T>) -> T {
    sym_eigenvalues(m).last().copied().unwrap_or(T::zero())
}

/// Operator norm of a symmetric matrix: largest `|λ|`.
pub fn spectral_norm_sym<T: Real>(m: &Matrix<T>) -> T {
    sym_eigenvalues(m).into_iter().fold(T::zero(), |acc, l| acc.max(l.abs()))
}

/// Operator (2-)norm of a general matrix, via the eigenvalues of `MᵀM`.
pub fn operator_norm<T: Real>(m: &Matrix<T>) -> T {
    max_eigenvalue(&m.transpose().matmul(m)).max(T::zero()).sqrt()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(Error::Argument("solve: dimension mismatch".into()));
    }
    let scale = a.max_abs().max(T::min_positive_value());
    let mut m = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m[(r, col)].abs() > m[(piv, col)].abs() {
                piv = r;
            }
        }
        if m[(piv, col)].abs() <= T::lit(1e3) * T::epsilon() * scale {
            return Err(Error::Singular("matrix is numerically singular".into()));
        }
        if piv != col {
            for c in 0..n {
                let tmp = m[(col, c)];
                m[(col, c)] = m[(piv, c)];
                m[(piv, c)] = tmp;
            }
            x.swap(col, piv);
        }
        for r in (col + 1)..n {
            let f = m[(r, col)] / m[(col, col)];
            if f == T::zero() {
                continue;
            }
            for c in col..n {
                m[(r, c)] = m[(r, c)] - f * m[(col, c)];
            }
            x[r] = x[r] - f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for c in (col + 1)..n {
            s = s - m[(col, c)] * x[c];
        }
        x[col] = s / m[(col, col)];
    }
    Ok(x)
}

/// Inverse of a square matrix, column by column.
pub fn inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    let mut out = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        let col = solve(a, &e)?;
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    Ok(out)
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

#[inline]
pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `a + s·b`
#[inline]
pub fn axpy<T: Real>(a: &[T], s: T, b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
}

#[inline]
pub fn scaled<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

#[inline]
pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

#[inline]
pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_eigen_reconstructs() {
        let m = Matrix::from_rows(&[
            vec![4.0, 1.0, -2.0],
            vec![1.0, 2.0, 0.5],
            vec![-2.0, 0.5, -3.0],
        ]);
        let e = sym_eigen(&m);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let d = Matrix::diagonal(&e.values);
        let back = e.vectors.matmul(&d).matmul(&e.vectors.transpose());
        assert!(back.sub(&m).max_abs() < 1e-12);
        let orth = e.vectors.transpose().matmul(&e.vectors);
        assert!(orth.sub(&Matrix::identity(3)).max_abs() < 1e-12);
        assert!((e.values.iter().sum::<f64>() - m.trace()).abs() < 1e-12);
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let e = sym_eigenvalues(&Matrix::diagonal(&[2.0f32, -3.0]));
        assert_eq!(e, vec![-3.0, 2.0]);
    }

    #[test]
    fn solve_with_pivoting() {
        let a = Matrix::from_rows(&[vec![0.0f64, 2.0], vec![3.0, 1.0]]);
        let x = solve(&a, &[4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_solve_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(solve(&a, &[1.0, 1.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn norms() {
        let m = Matrix::from_rows(&[vec![1.0f64, 0.0], vec![0.0, -5.0]]);
        assert!((spectral_norm_sym(&m) - 5.0).abs() < 1e-14);
        let r = Matrix::from_rows(&[vec![0.0f64, 3.0], vec![0.0, 0.0]]);
        assert!((operator_norm(&r) - 3.0).abs() < 1e-12);
    }
}
