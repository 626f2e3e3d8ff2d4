//! The eigen-residual `F(x) = A x^{m-1} - (A x^m) x`, its Jacobian, the
//! objective `phi(x) = A x^m / m`, and the merit `theta(x) = ||F(x)||^2 / 2`.
//!
//! On the sphere `F(x) = (I - x x^T) A x^{m-1}`, the projected gradient of
//! `phi`, so `||F(x)||` is also the termination residual.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::sphere::UnitVector;
use crate::tensor::{dot, SymmetricTensor};

/// A Z-eigenpair: `A x^{m-1} = lambda x` with `||x|| = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigenpair {
    pub x: UnitVector,
    pub lambda: f64,
}

/// All first- and second-order quantities at one point, from a single pass
/// over the tensor.
#[derive(Clone, Debug)]
pub struct PointEval {
    pub order: usize,
    pub x: Vec<f64>,
    /// `A x^m`.
    pub lambda: f64,
    /// `A x^{m-1}`.
    pub grad: Vec<f64>,
    /// `A x^{m-2}`.
    pub hess: DenseMatrix,
    /// `F(x)`.
    pub residual: Vec<f64>,
}

impl PointEval {
    /// Evaluates at an arbitrary `x`, not necessarily on the sphere.
    pub fn new(t: &SymmetricTensor, x: &[f64]) -> Result<Self> {
        let hess = t.axm2(x)?;
        let grad = hess.matvec(x);
        let lambda = dot(&grad, x);
        let residual = grad.iter().zip(x).map(|(g, xi)| g - lambda * xi).collect();
        Ok(Self {
            order: t.order(),
            x: x.to_vec(),
            lambda,
            grad,
            hess,
            residual,
        })
    }

    pub fn res_norm(&self) -> f64 {
        dot(&self.residual, &self.residual).sqrt()
    }

    pub fn theta(&self) -> f64 {
        0.5 * dot(&self.residual, &self.residual)
    }

    pub fn phi(&self) -> f64 {
        self.lambda / self.order as f64
    }

    /// `F'(x) = (m-1) A x^{m-2} - (A x^m) I - m x (A x^{m-1})^T`.
    pub fn jacobian(&self) -> DenseMatrix {
        let m = self.order as f64;
        let n = self.x.len();
        let mut jac = self.hess.clone();
        jac.scale(m - 1.0);
        for i in 0..n {
            jac[(i, i)] -= self.lambda;
            for j in 0..n {
                jac[(i, j)] -= m * self.x[i] * self.grad[j];
            }
        }
        jac
    }

    /// `F'(x)^T F(x)`.
    pub fn grad_theta(&self, jac: &DenseMatrix) -> Vec<f64> {
        jac.tr_matvec(&self.residual)
    }

    pub fn is_finite(&self) -> bool {
        self.lambda.is_finite()
            && self.residual.iter().all(|v| v.is_finite())
            && self.hess.is_finite()
    }
}

pub fn phi(t: &SymmetricTensor, x: &UnitVector) -> Result<f64> {
    Ok(t.axm(x)? / t.order() as f64)
}

/// `F` on all of `R^n` (no normalization), as used for difference checks.
pub fn residual_raw(t: &SymmetricTensor, x: &[f64]) -> Result<Vec<f64>> {
    let g = t.axm1(x)?;
    let lambda = dot(&g, x);
    Ok(g.iter().zip(x).map(|(gi, xi)| gi - lambda * xi).collect())
}

pub fn residual_f(t: &SymmetricTensor, x: &UnitVector) -> Result<Vec<f64>> {
    residual_raw(t, x)
}

pub fn jacobian_f(t: &SymmetricTensor, x: &UnitVector) -> Result<DenseMatrix> {
    Ok(PointEval::new(t, x)?.jacobian())
}

pub fn theta(t: &SymmetricTensor, x: &UnitVector) -> Result<f64> {
    let f = residual_f(t, x)?;
    Ok(0.5 * dot(&f, &f))
}

pub fn grad_theta(t: &SymmetricTensor, x: &UnitVector) -> Result<Vec<f64>> {
    let eval = PointEval::new(t, x)?;
    Ok(eval.grad_theta(&eval.jacobian()))
}

/// `||(I - x x^T) A x^{m-1}||`, evaluated as `||F(x)||`.
pub fn res_norm(t: &SymmetricTensor, x: &UnitVector) -> Result<f64> {
    let f = residual_f(t, x)?;
    Ok(dot(&f, &f).sqrt())
}

/// `phi` restricted to the retraction curve `alpha -> (x + alpha d) / ||x + alpha d||`.
///
/// `phi(x(alpha)) - phi(x)` is formed from the coefficients of
/// `A (x + t d)^m` and `expm1`/`ln_1p` of the norm growth, so decreases far
/// below the rounding level of `phi(x)` itself are still resolved. Both
/// ends are measured with the degree-zero extension `A y^m / (m ||y||^m)`,
/// which makes the result insensitive to `x` being off the sphere by an ulp.
#[derive(Clone, Debug)]
pub struct PhiCurve {
    order: usize,
    poly: Vec<f64>,
    xx: f64,
    xd: f64,
    dd: f64,
}

impl PhiCurve {
    pub fn new(t: &SymmetricTensor, x: &[f64], d: &[f64]) -> Result<Self> {
        let poly = t.along_line(x, d)?;
        Ok(Self {
            order: t.order(),
            poly,
            xx: dot(x, x),
            xd: dot(x, d),
            dd: dot(d, d),
        })
    }

    /// `phi(x)` on the sphere.
    pub fn value(&self) -> f64 {
        let m = self.order as f64;
        self.poly[0] / (m * self.xx.powf(0.5 * m))
    }

    /// `phi(x(alpha)) - phi(x)`; NaN when `x + alpha d` vanishes.
    pub fn change(&self, alpha: f64) -> f64 {
        let m = self.order as f64;
        let increment = alpha * self.poly[1..].iter().rev().fold(0.0, |acc, p| acc * alpha + p);
        let eta = (2.0 * alpha * self.xd + alpha * alpha * self.dd) / self.xx;
        if !(eta > -1.0) {
            return f64::NAN;
        }
        // ||x + alpha d||^m / ||x||^m - 1
        let growth = (0.5 * m * eta.ln_1p()).exp_m1();
        (increment - self.poly[0] * growth) / (m * self.xx.powf(0.5 * m) * (1.0 + growth))
    }
}
