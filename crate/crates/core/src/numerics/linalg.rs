//! Small dense matrices and Cholesky factorization.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};

const CHOL_JITTER: f64 = 1e-10;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
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

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self { rows: r, cols, data: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Submatrix with the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self.max_abs().max(T::one());
        (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }

    /// (M + Mᵀ)/2.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)]) * c(0.5))
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
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

/// Symmetric positive-definite matrix together with its lower Cholesky
/// factor A (Σ = A·Aᵀ).
#[derive(Debug, Clone, PartialEq)]
pub struct PdMatrix<T> {
    entries: Matrix<T>,
    chol: Matrix<T>,
    jittered: bool,
}

/// Cholesky factorization of a symmetric matrix.
///
/// Matrices with two numerically identical rows (duplicated sites) are
/// rejected outright. Otherwise a failed factorization is retried once with
/// a diagonal jitter of 1e-10 relative to the largest diagonal entry.
pub fn cholesky_pd<T: Scalar>(matrix: &Matrix<T>) -> Result<PdMatrix<T>> {
    let n = matrix.rows();
    if matrix.cols() != n {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", n, matrix.cols())));
    }
    let sym_tol = c::<T>(1e-12).max(T::epsilon() * c(64.0));
    if !matrix.is_symmetric(sym_tol) {
        return Err(Error::Domain("matrix is not symmetric".into()));
    }
    if let Some(index) = duplicated_row(matrix) {
        return Err(Error::NotPositiveDefinite { index, pivot: 0.0 });
    }
    match factor(matrix, T::zero()) {
        Ok(chol) => Ok(PdMatrix { entries: matrix.clone(), chol, jittered: false }),
        Err(_) => {
            let max_diag = (0..n).fold(T::zero(), |m, i| m.max(matrix[(i, i)].abs()));
            let chol = factor(matrix, c::<T>(CHOL_JITTER) * max_diag.max(T::min_positive_value()))?;
            Ok(PdMatrix { entries: matrix.clone(), chol, jittered: true })
        }
    }
}

fn duplicated_row<T: Scalar>(m: &Matrix<T>) -> Option<usize> {
    let n = m.rows();
    let tol = T::epsilon() * c::<T>(4.0) * m.max_abs();
    for i in 1..n {
        for j in 0..i {
            if (0..n).all(|k| (m[(i, k)] - m[(j, k)]).abs() <= tol) {
                return Some(i);
            }
        }
    }
    None
}

fn factor<T: Scalar>(m: &Matrix<T>, jitter: T) -> Result<Matrix<T>> {
    let n = m.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)] + jitter;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d.as_f64() });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

impl<T: Scalar> PdMatrix<T> {
    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    /// Lower-triangular factor A with Σ = A·Aᵀ.
    pub fn chol(&self) -> &Matrix<T> {
        &self.chol
    }

    pub fn jittered(&self) -> bool {
        self.jittered
    }

    /// Solves A·x = b.
    pub fn solve_lower(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let l = &self.chol;
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= l[(i, k)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        x
    }

    /// Solves Aᵀ·x = b.
    pub fn solve_upper(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let l = &self.chol;
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        x
    }

    /// Σ⁻¹·b via two triangular solves.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// A⁻¹·B, column by column.
    pub fn solve_lower_mat(&self, b: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col: Vec<T> = (0..b.rows()).map(|i| b[(i, j)]).collect();
            for (i, v) in self.solve_lower(&col).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// xᵀ·Σ⁻¹·x.
    pub fn quad_form(&self, x: &[T]) -> T {
        self.solve_lower(x).iter().map(|&v| v * v).sum()
    }

    /// log |Σ|.
    pub fn log_det(&self) -> T {
        (0..self.dim()).map(|i| self.chol[(i, i)].ln()).sum::<T>() * c(2.0)
    }

    /// Principal submatrix on `idx`, refactorized.
    pub fn principal(&self, idx: &[usize]) -> Result<PdMatrix<T>> {
        cholesky_pd(&self.entries.select(idx, idx))
    }
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues and the matrix whose columns are the
/// corresponding eigenvectors.
pub fn symmetric_eigen<T: Scalar>(m: &Matrix<T>) -> (Vec<T>, Matrix<T>) {
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = Matrix::identity(n);
    for _sweep in 0..100 {
        let off: T = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)] * a[(i, j)]).sum();
        if off <= T::epsilon() * T::epsilon() * a.max_abs().max(T::min_positive_value()).powi(2) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (c::<T>(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = cs * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}
