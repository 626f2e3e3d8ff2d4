//! Feasibility machinery on the unit sphere `{x : x^T x = 1}`.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::tensor::dot;

/// A point on the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `v`. Fails for zero or non-finite input.
    pub fn new(mut v: Vec<f64>) -> Result<Self> {
        let norm = dot(&v, &v).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalizable);
        }
        v.iter_mut().for_each(|a| *a /= norm);
        Ok(Self(v))
    }

    /// The `i`-th standard basis vector of `R^n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl<'de> Deserialize<'de> for UnitVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(de)?;
        Self::new(v).map_err(serde::de::Error::custom)
    }
}

/// `(x + alpha d) / ||x + alpha d||`.
pub fn retract(x: &UnitVector, d: &[f64], alpha: f64) -> Result<UnitVector> {
    check_dim(x, d)?;
    let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
    UnitVector::new(y).map_err(|_| Error::DegenerateRetraction)
}

/// `(I - x x^T) v`.
pub fn project_tangent(x: &UnitVector, v: &[f64]) -> Result<Vec<f64>> {
    check_dim(x, v)?;
    let c = dot(x, v);
    Ok(v.iter().zip(x.iter()).map(|(a, b)| a - c * b).collect())
}

fn check_dim(x: &UnitVector, v: &[f64]) -> Result<()> {
    if x.dim() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: v.len(),
        });
    }
    Ok(())
}

/// Orthonormal basis of the tangent space `x^perp`, stored as the columns
/// of an `n x (n-1)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentBasis {
    basis: DenseMatrix,
    base: UnitVector,
}

impl TangentBasis {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn base(&self) -> &UnitVector {
        &self.base
    }

    /// `U u`, mapping reduced coordinates into `R^n`.
    pub fn lift(&self, u: &[f64]) -> Vec<f64> {
        self.basis.matvec(u)
    }

    /// `U^T v`.
    pub fn reduce(&self, v: &[f64]) -> Vec<f64> {
        self.basis.tr_matvec(v)
    }

    /// `U^T A U`.
    pub fn reduce_matrix(&self, a: &DenseMatrix) -> DenseMatrix {
        self.basis.tr_matmul(&a.matmul(&self.basis))
    }
}

/// Builds `U_x` from the Householder reflector `H = I - 2 w w^T / w^T w`
/// with `H x = s e_1`, `s = sign(x_1)` (`+1` at zero), keeping columns
/// `2..=n` of `H`.
pub fn tangent_basis(x: &UnitVector) -> TangentBasis {
    let n = x.dim();
    let s = if x[0] < 0.0 { -1.0 } else { 1.0 };
    let tail_sq: f64 = x[1..].iter().map(|v| v * v).sum();
    let mut w = x.to_vec();
    // x_1 - s, rewritten so it does not cancel when |x_1| is near one.
    w[0] = -s * tail_sq / (1.0 + x[0].abs());
    let ww = w[0] * w[0] + tail_sq;

    let mut basis = DenseMatrix::zeros(n, n.saturating_sub(1));
    for i in 0..n {
        for j in 1..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let reflect = if ww > 0.0 { 2.0 * w[i] * w[j] / ww } else { 0.0 };
            basis[(i, j - 1)] = delta - reflect;
        }
    }
    TangentBasis {
        basis,
        base: x.clone(),
    }
}

/// Sign pattern for random starting points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignPattern {
    Nonnegative,
    Nonpositive,
    Unrestricted,
}

/// A seeded random point on the sphere. Entries are drawn i.i.d. uniform on
/// `[0, 1)` from ChaCha8; the nonpositive draw is the negated nonnegative
/// one and the unrestricted draw maps each entry to `2u - 1`.
pub fn random_unit(seed: u64, n: usize, sign: SignPattern) -> UnitVector {
    assert!(n >= 1, "random_unit needs n >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let raw: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                match sign {
                    SignPattern::Nonnegative => u,
                    SignPattern::Nonpositive => -u,
                    SignPattern::Unrestricted => 2.0 * u - 1.0,
                }
            })
            .collect();
        if let Ok(x) = UnitVector::new(raw) {
            return x;
        }
    }
}
