//! Search directions: the reduced Newton step, the damped (LM) step and the
//! preconditioned projected gradient.

use crate::error::{Error, Result};
use crate::linalg::{is_positive_definite, solve, DenseMatrix};
use crate::residual::PointEval;
use crate::sphere::{tangent_basis, UnitVector};
use crate::tensor::{dot, SymmetricTensor};

/// Relative threshold of the curve-descent test `g^T d < -eps ||g|| ||d||`.
pub const DESCENT_EPS: f64 = 1e-12;

pub(crate) fn is_descent(gradient: &[f64], d: &[f64]) -> bool {
    let g2 = dot(gradient, gradient);
    let d2 = dot(d, d);
    dot(gradient, d) < -DESCENT_EPS * (g2 * d2).sqrt()
}

/// Newton direction from the reduced system `(U^T F' U) u = -U^T F`,
/// `d = U u`. [`Error::Singular`] signals that it does not exist.
pub fn newton_direction(t: &SymmetricTensor, x: &UnitVector) -> Result<Vec<f64>> {
    let eval = PointEval::new(t, x)?;
    newton_from_eval(x, &eval, &eval.jacobian())
}

pub(crate) fn newton_from_eval(
    x: &UnitVector,
    eval: &PointEval,
    jac: &DenseMatrix,
) -> Result<Vec<f64>> {
    let basis = tangent_basis(x);
    let reduced = basis.reduce_matrix(jac);
    let rhs: Vec<f64> = basis.reduce(&eval.residual).iter().map(|v| -v).collect();
    let u = solve(&reduced, &rhs)?;
    Ok(basis.lift(&u))
}

/// Damped direction solving `(F'^2 + mu ||F|| I) d = -F' F`.
pub fn lm_direction(t: &SymmetricTensor, x: &UnitVector, mu: f64) -> Result<Vec<f64>> {
    if !(mu > 0.0) {
        return Err(Error::InvalidConfig(format!("mu must be positive, got {mu}")));
    }
    let eval = PointEval::new(t, x)?;
    lm_from_eval(&eval, &eval.jacobian(), mu)
}

pub(crate) fn lm_from_eval(eval: &PointEval, jac: &DenseMatrix, mu: f64) -> Result<Vec<f64>> {
    let mut system = jac.matmul(jac);
    system.shift_diagonal(mu * eval.res_norm());
    let rhs: Vec<f64> = jac.matvec(&eval.residual).iter().map(|v| -v).collect();
    solve(&system, &rhs)
}

/// `-B^{-1} F(x)` for a symmetric positive definite `B`.
pub fn descent_direction(t: &SymmetricTensor, x: &UnitVector, b: &DenseMatrix) -> Result<Vec<f64>> {
    let eval = PointEval::new(t, x)?;
    preconditioned_from_eval(&eval, b, 0)
}

pub(crate) fn preconditioned_from_eval(
    eval: &PointEval,
    b: &DenseMatrix,
    k: usize,
) -> Result<Vec<f64>> {
    if !b.is_square() || b.rows() != eval.x.len() {
        return Err(Error::DimensionMismatch {
            expected: eval.x.len(),
            got: b.rows(),
        });
    }
    let asym = (0..b.rows())
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (b[(i, j)] - b[(j, i)]).abs())
        .fold(0.0, f64::max);
    if asym > 1e-12 * b.norm_inf() || !is_positive_definite(b) {
        return Err(Error::NotPositiveDefinite(k));
    }
    let z = solve(b, &eval.residual).map_err(|_| Error::NotPositiveDefinite(k))?;
    Ok(z.iter().map(|v| -v).collect())
}
