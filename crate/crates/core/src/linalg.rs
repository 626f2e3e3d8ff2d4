//! Small dense kernels for the reduced Newton and damped systems.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot floor for [`solve`], against the infinity norm of `A`.
pub const SOLVE_PIVOT_FLOOR: f64 = 1e-14;
/// Relative pivot floor for [`is_positive_definite`], against the largest
/// diagonal magnitude.
pub const PD_PIVOT_FLOOR: f64 = 1e-12;

/// Row-major dense matrix. Zero-sized shapes are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    /// Panics on ragged rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `A v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^T v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "tr_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    /// `A B`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in dst.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `A^T B`.
    pub fn tr_matmul(&self, other: &Self) -> Self {
        self.transpose().matmul(other)
    }

    /// `(A + A^T) / 2`.
    pub fn symmetric_part(&self) -> Self {
        assert!(self.is_square(), "symmetric part of a non-square matrix");
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shift_diagonal(&mut self, shift: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += shift;
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|a| *a *= c);
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `A z = b` by Gaussian elimination with row pivoting.
///
/// Returns [`Error::Singular`] when a pivot falls to `SOLVE_PIVOT_FLOOR`
/// times `||A||_inf` or below, or when the input is not finite.
pub fn solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }

    let floor = SOLVE_PIVOT_FLOOR * a.norm_inf();
    let mut m = a.data.clone();
    let mut z = b.to_vec();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .expect("non-empty pivot range");
        let pivot = m[pivot_row * n + col];
        if pivot.abs() <= floor {
            return Err(Error::Singular);
        }
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
            }
            z.swap(col, pivot_row);
        }
        for i in col + 1..n {
            let factor = m[i * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                m[i * n + j] -= factor * m[col * n + j];
            }
            z[i] -= factor * z[col];
        }
    }
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|j| m[i * n + j] * z[j]).sum();
        z[i] = (z[i] - tail) / m[i * n + i];
    }
    Ok(z)
}

/// Whether the symmetric part of `a` is positive definite, judged by an
/// unpivoted Cholesky factorization whose pivots must all exceed
/// `PD_PIVOT_FLOOR` times the largest diagonal magnitude. The empty matrix
/// is positive definite.
pub fn is_positive_definite(a: &DenseMatrix) -> bool {
    assert!(a.is_square(), "positive definiteness of a non-square matrix");
    let n = a.rows();
    if n == 0 {
        return true;
    }
    if !a.is_finite() {
        return false;
    }
    let s = a.symmetric_part();
    let scale = (0..n).map(|i| s[(i, i)].abs()).fold(0.0, f64::max);
    let floor = PD_PIVOT_FLOOR * scale;

    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let pivot = s[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if !(pivot > floor) {
            return false;
        }
        let root = pivot.sqrt();
        l[(j, j)] = root;
        for i in j + 1..n {
            let dotp: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum();
            l[(i, j)] = (s[(i, j)] - dotp) / root;
        }
    }
    true
}
