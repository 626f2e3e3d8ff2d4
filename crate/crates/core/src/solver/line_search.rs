//! Backtracking along the retraction curve `x(alpha)`, with trial steps
//! `alpha = ratio^i`, `i = 0, 1, ...`.

use serde::Serialize;

use super::SolverConfig;
use crate::error::{Error, Result};
use crate::residual::{PhiCurve, PointEval};
use crate::sphere::{retract, UnitVector};
use crate::tensor::{dot, SymmetricTensor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Step {
    pub alpha: f64,
    pub backtracks: usize,
}

/// Why a backtracking search gave up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchFailure {
    pub backtracks: usize,
}

fn backtrack(
    cfg: &SolverConfig,
    mut accept: impl FnMut(f64) -> bool,
) -> std::result::Result<Step, LineSearchFailure> {
    for i in 0..=cfg.max_backtracks {
        let alpha = cfg.backtrack_ratio.powi(i as i32);
        if accept(alpha) {
            return Ok(Step {
                alpha,
                backtracks: i,
            });
        }
    }
    Err(LineSearchFailure {
        backtracks: cfg.max_backtracks,
    })
}

/// Armijo search on `phi`: `phi(x(alpha)) <= phi(x) + sigma alpha F(x)^T d`.
pub(crate) fn search_phi(
    t: &SymmetricTensor,
    eval: &PointEval,
    d: &[f64],
    cfg: &SolverConfig,
) -> Result<std::result::Result<Step, LineSearchFailure>> {
    let curve = PhiCurve::new(t, &eval.x, d)?;
    let slope = dot(&eval.residual, d);
    Ok(backtrack(cfg, |alpha| curve.change(alpha) <= cfg.sigma * alpha * slope))
}

/// Armijo search on `theta`: `theta(x(alpha)) <= theta(x) + sigma alpha grad(theta)^T d`.
pub(crate) fn search_theta(
    t: &SymmetricTensor,
    x: &UnitVector,
    theta0: f64,
    slope: f64,
    d: &[f64],
    cfg: &SolverConfig,
) -> Result<std::result::Result<Step, LineSearchFailure>> {
    let mut failure = None;
    let outcome = backtrack(cfg, |alpha| match retract(x, d, alpha) {
        Ok(y) => match crate::residual::theta(t, &y) {
            Ok(theta) => theta <= theta0 + cfg.sigma * alpha * slope,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        },
        Err(_) => false,
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(outcome),
    }
}

fn to_error(outcome: std::result::Result<Step, LineSearchFailure>) -> Result<Step> {
    outcome.map_err(|f| Error::LineSearchFailed {
        backtracks: f.backtracks,
    })
}

/// Backtracking for the objective `phi`; used by the descent and
/// optimization-based Newton methods.
pub fn backtrack_phi(
    t: &SymmetricTensor,
    x: &UnitVector,
    d: &[f64],
    cfg: &SolverConfig,
) -> Result<Step> {
    let eval = PointEval::new(t, x)?;
    if d.len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: d.len(),
        });
    }
    to_error(search_phi(t, &eval, d, cfg)?)
}

/// Backtracking for the merit `theta`; used by the equation-based Newton
/// method.
pub fn backtrack_theta(
    t: &SymmetricTensor,
    x: &UnitVector,
    d: &[f64],
    cfg: &SolverConfig,
) -> Result<Step> {
    let eval = PointEval::new(t, x)?;
    if d.len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: d.len(),
        });
    }
    let slope = dot(&eval.grad_theta(&eval.jacobian()), d);
    to_error(search_theta(t, x, eval.theta(), slope, d, cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residual::{grad_theta, phi, residual_f};
    use crate::solver::{direction::newton_direction, Variant};
    use crate::sphere::{random_unit, SignPattern};
    use crate::tensor::{make_problem, ProblemSpec};

    #[test]
    fn unit_step_accepted_first() {
        let t = make_problem(&ProblemSpec::p1()).unwrap();
        let x = UnitVector::basis(2, 0);
        let f = residual_f(&t, &x).unwrap();
        let d: Vec<f64> = f.iter().map(|v| -0.1 * v).collect();
        let cfg = SolverConfig::new(Variant::NewtonOpt);
        let step = backtrack_phi(&t, &x, &d, &cfg).unwrap();
        assert_eq!(step, Step { alpha: 1.0, backtracks: 0 });
    }

    /// On P3 with n = 10, scale the gradient step until the unit step
    /// overshoots but 0.1 does not, then confirm by direct evaluation.
    #[test]
    fn one_backtrack_on_p3() {
        let t = make_problem(&ProblemSpec::p3(10)).unwrap();
        let x = random_unit(4, 10, SignPattern::Nonpositive);
        let f = residual_f(&t, &x).unwrap();
        let cfg = SolverConfig::new(Variant::NewtonOpt);
        let armijo = |d: &[f64], alpha: f64| {
            let y = retract(&x, d, alpha).unwrap();
            phi(&t, &y).unwrap() <= phi(&t, &x).unwrap() + cfg.sigma * alpha * dot(&f, d)
        };
        let scale = (0..60)
            .map(|k| 1.25f64.powi(k))
            .find(|&s| {
                let d: Vec<f64> = f.iter().map(|v| -s * v).collect();
                !armijo(&d, 1.0) && armijo(&d, 0.1)
            })
            .expect("a scale with exactly one backtrack");
        let d: Vec<f64> = f.iter().map(|v| -scale * v).collect();
        let step = backtrack_phi(&t, &x, &d, &cfg).unwrap();
        assert_eq!(step.backtracks, 1);
        assert!((step.alpha - 0.1).abs() < 1e-16);
    }

    #[test]
    fn ascent_direction_fails() {
        let t = make_problem(&ProblemSpec::p1()).unwrap();
        let x = UnitVector::basis(2, 0);
        let cfg = SolverConfig {
            max_backtracks: 5,
            ..SolverConfig::new(Variant::NewtonOpt)
        };
        let f: Vec<f64> = residual_f(&t, &x).unwrap().iter().map(|v| 1e-3 * v).collect();
        assert!(matches!(
            backtrack_phi(&t, &x, &f, &cfg),
            Err(Error::LineSearchFailed { backtracks: 5 })
        ));
        let gt: Vec<f64> = grad_theta(&t, &x).unwrap().iter().map(|v| 1e-3 * v).collect();
        assert!(backtrack_theta(&t, &x, &gt, &cfg).is_err());
    }

    #[test]
    fn newton_step_on_theta() {
        let t = make_problem(&ProblemSpec::p1()).unwrap();
        let x = UnitVector::basis(2, 0);
        let d = newton_direction(&t, &x).unwrap();
        let gt = grad_theta(&t, &x).unwrap();
        assert!((dot(&gt, &d) + 1.0).abs() < 1e-14);
        let cfg = SolverConfig::new(Variant::NewtonNle);
        let step = backtrack_theta(&t, &x, &d, &cfg).unwrap();
        assert_eq!(step, Step { alpha: 1.0, backtracks: 0 });
    }

    #[test]
    fn dimension_checks() {
        let t = make_problem(&ProblemSpec::p1()).unwrap();
        let x = UnitVector::basis(2, 0);
        let cfg = SolverConfig::default();
        assert!(backtrack_phi(&t, &x, &[1.0], &cfg).is_err());
        assert!(backtrack_theta(&t, &x, &[1.0], &cfg).is_err());
    }
}
