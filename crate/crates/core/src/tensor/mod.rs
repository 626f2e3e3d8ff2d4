//! Dense symmetric tensors and the contractions `A x^m`, `A x^{m-1}` and
//! `A x^{m-2}`.
//!
//! Coefficients are stored as the full `n^m` array in row-major order: the
//! last index varies fastest. Every contraction therefore folds the trailing
//! index against a vector, which is a contiguous dot product per row.

mod problems;
mod stsr;

pub use problems::{make_problem, make_problem_capped, ProblemId, ProblemSpec};
pub use stsr::{load_tensor, load_tensor_capped, parse_tensor, store_tensor, write_tensor};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Default cap on the number of dense entries `n^m` a tensor may hold.
pub const DEFAULT_MAX_ENTRIES: usize = 100_000_000;

/// An order-`m`, dimension-`n` real tensor whose coefficients are invariant
/// under every permutation of their indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTensor {
    order: usize,
    dim: usize,
    coeffs: Vec<f64>,
}

/// Number of dense entries `dim^order`, checked against `cap`.
pub fn dense_len(order: usize, dim: usize, cap: usize) -> Result<usize> {
    if order < 2 {
        return Err(Error::InvalidShape(format!("order must be >= 2, got {order}")));
    }
    if dim < 1 {
        return Err(Error::InvalidShape("dimension must be >= 1".into()));
    }
    let entries = (dim as u128).checked_pow(order as u32).unwrap_or(u128::MAX);
    if entries > cap as u128 {
        return Err(Error::TooLarge { entries, cap });
    }
    Ok(entries as usize)
}

/// Row-major odometer over `{0..dim}^order`, last index fastest.
#[derive(Debug, Clone)]
pub(crate) struct IndexTuples {
    current: Vec<usize>,
    dim: usize,
    done: bool,
}

impl IndexTuples {
    pub(crate) fn new(order: usize, dim: usize) -> Self {
        Self {
            current: vec![0; order],
            dim,
            done: dim == 0,
        }
    }

    /// Current tuple, or `None` once exhausted.
    pub(crate) fn get(&self) -> Option<&[usize]> {
        (!self.done).then_some(self.current.as_slice())
    }

    pub(crate) fn advance(&mut self) {
        for slot in self.current.iter_mut().rev() {
            *slot += 1;
            if *slot < self.dim {
                return;
            }
            *slot = 0;
        }
        self.done = true;
    }
}

pub(crate) fn linear_index(tuple: &[usize], dim: usize) -> usize {
    tuple.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Linear index of the non-decreasing rearrangement of `tuple`. It is the
/// smallest linear index in the permutation orbit.
fn canonical_index(tuple: &[usize], dim: usize, scratch: &mut Vec<usize>) -> usize {
    scratch.clear();
    scratch.extend_from_slice(tuple);
    scratch.sort_unstable();
    linear_index(scratch, dim)
}

impl SymmetricTensor {
    /// Symmetrizes a dense row-major array by averaging each entry over its
    /// permutation orbit. Orbits that are already constant are copied as is.
    pub fn symmetrize(order: usize, dim: usize, raw: &[f64]) -> Result<Self> {
        Self::symmetrize_capped(order, dim, raw, DEFAULT_MAX_ENTRIES)
    }

    pub fn symmetrize_capped(order: usize, dim: usize, raw: &[f64], cap: usize) -> Result<Self> {
        let len = dense_len(order, dim, cap)?;
        if raw.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: raw.len(),
            });
        }

        let mut sums = vec![0.0; len];
        let mut counts = vec![0u32; len];
        let mut uniform = vec![true; len];
        let mut scratch = Vec::with_capacity(order);
        let mut tuples = IndexTuples::new(order, dim);
        let mut idx = 0;
        while let Some(t) = tuples.get() {
            let value = raw[idx];
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    index: t.iter().map(|i| i + 1).collect(),
                    value,
                });
            }
            let c = canonical_index(t, dim, &mut scratch);
            sums[c] += value;
            counts[c] += 1;
            uniform[c] &= value == raw[c];
            idx += 1;
            tuples.advance();
        }

        let mut coeffs = vec![0.0; len];
        let mut tuples = IndexTuples::new(order, dim);
        let mut idx = 0;
        while let Some(t) = tuples.get() {
            let c = canonical_index(t, dim, &mut scratch);
            coeffs[idx] = if uniform[c] {
                raw[c]
            } else {
                sums[c] / counts[c] as f64
            };
            idx += 1;
            tuples.advance();
        }
        Ok(Self { order, dim, coeffs })
    }

    /// Builds a tensor from a function of the (0-based) index tuple. The
    /// function is evaluated once per orbit, at its non-decreasing tuple.
    pub fn from_fn(order: usize, dim: usize, f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        Self::from_fn_capped(order, dim, DEFAULT_MAX_ENTRIES, f)
    }

    pub fn from_fn_capped(
        order: usize,
        dim: usize,
        cap: usize,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let len = dense_len(order, dim, cap)?;
        let mut coeffs = vec![0.0; len];
        let mut scratch = Vec::with_capacity(order);
        let mut tuples = IndexTuples::new(order, dim);
        let mut idx = 0;
        while let Some(t) = tuples.get() {
            let c = canonical_index(t, dim, &mut scratch);
            coeffs[idx] = if c == idx {
                let value = f(t);
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        index: t.iter().map(|i| i + 1).collect(),
                        value,
                    });
                }
                value
            } else {
                coeffs[c]
            };
            idx += 1;
            tuples.advance();
        }
        Ok(Self { order, dim, coeffs })
    }

    /// An order-2 tensor from a square matrix; the matrix is symmetrized.
    pub fn from_matrix(a: &DenseMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::InvalidShape(format!(
                "matrix must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        Self::symmetrize(2, a.rows(), a.as_slice())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major dense coefficients.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient at a 0-based index tuple.
    pub fn get(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.order, "index tuple has wrong length");
        self.coeffs[linear_index(index, self.dim)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            order: self.order,
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|a| c * a).collect(),
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `A x^m`, the degree-`m` form.
    pub fn axm(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        Ok(dot(&self.contract_vector(x), x))
    }

    /// `A x^{m-1}`; its `i`-th entry contracts every index but the first.
    pub fn axm1(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok(self.contract_vector(x))
    }

    /// `A x^{m-2}` as a symmetric `n x n` matrix.
    pub fn axm2(&self, x: &[f64]) -> Result<DenseMatrix> {
        self.check_len(x)?;
        Ok(self.contract_matrix(x))
    }

    pub(crate) fn contract_matrix(&self, x: &[f64]) -> DenseMatrix {
        let n = self.dim;
        let data = if self.order == 2 {
            self.coeffs.clone()
        } else {
            let mut data = contract_last(&self.coeffs, x);
            for _ in 3..self.order {
                data = contract_last(&data, x);
            }
            data
        };
        DenseMatrix::from_row_major(n, n, data)
    }

    pub(crate) fn contract_vector(&self, x: &[f64]) -> Vec<f64> {
        let mut data = contract_last(&self.coeffs, x);
        for _ in 2..self.order {
            data = contract_last(&data, x);
        }
        data
    }

    /// Coefficients `p_0..=p_m` of the polynomial `t -> A (x + t d)^m`.
    ///
    /// `p_0 = A x^m` and `p_j = C(m, j) A x^{m-j} d^j`. The increments
    /// `sum_{j>=1} p_j t^j` are computed without cancelling against `p_0`.
    pub fn along_line(&self, x: &[f64], d: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        self.check_len(d)?;
        let mut data = poly_contract_last(&self.coeffs, 1, x, d);
        for width in 2..=self.order {
            data = poly_contract_last(&data, width, x, d);
        }
        Ok(data)
    }
}

/// Folds the trailing index of an array of degree-`width - 1` polynomials
/// against `x + t d`, raising the degree by one.
fn poly_contract_last(data: &[f64], width: usize, x: &[f64], d: &[f64]) -> Vec<f64> {
    let n = x.len();
    let rows = data.len() / (n * width);
    let mut out = vec![0.0; rows * (width + 1)];
    for (block, acc) in data.chunks_exact(n * width).zip(out.chunks_exact_mut(width + 1)) {
        for (i, poly) in block.chunks_exact(width).enumerate() {
            for (p, &c) in poly.iter().enumerate() {
                acc[p] += c * x[i];
                acc[p + 1] += c * d[i];
            }
        }
    }
    out
}

/// Folds the trailing index of a row-major array against `x`.
fn contract_last(data: &[f64], x: &[f64]) -> Vec<f64> {
    data.chunks_exact(x.len()).map(|row| dot(row, x)).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}
