//! The three feasible methods on the unit sphere: a general preconditioned
//! descent method, a globalized Newton method on `phi`, and a Newton method
//! on the merit `theta`.

pub mod direction;
pub mod line_search;

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::residual::{Eigenpair, PointEval};
use crate::sphere::{retract, UnitVector};
use crate::tensor::{dot, SymmetricTensor};

pub use direction::{descent_direction, lm_direction, newton_direction, DESCENT_EPS};
pub use line_search::{backtrack_phi, backtrack_theta, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Descent,
    NewtonOpt,
    NewtonNle,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Descent => "descent",
            Variant::NewtonOpt => "newton-opt",
            Variant::NewtonNle => "newton-nle",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Direction used when the Newton step is unavailable or not a descent
/// direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    Gradient,
    LevenbergMarquardt,
}

/// Supplies `B_k` to the descent method.
pub type MatrixSequence = Arc<dyn Fn(usize, &UnitVector) -> DenseMatrix + Send + Sync>;

#[derive(Clone, Default)]
pub enum Preconditioner {
    #[default]
    Identity,
    Sequence(MatrixSequence),
}

impl fmt::Debug for Preconditioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preconditioner::Identity => f.write_str("Identity"),
            Preconditioner::Sequence(_) => f.write_str("Sequence(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub variant: Variant,
    pub sigma: f64,
    pub backtrack_ratio: f64,
    pub mu: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    pub preconditioner: Preconditioner,
    pub fallback: Fallback,
    pub maximize: bool,
}

impl SolverConfig {
    pub fn new(variant: Variant) -> Self {
        let (sigma, backtrack_ratio) = match variant {
            Variant::Descent | Variant::NewtonOpt => (0.01, 0.1),
            Variant::NewtonNle => (0.005, 0.073),
        };
        Self {
            variant,
            sigma,
            backtrack_ratio,
            mu: 1.0,
            tol: 1e-10,
            max_iter: 300,
            max_backtracks: 40,
            preconditioner: Preconditioner::Identity,
            fallback: Fallback::LevenbergMarquardt,
            maximize: false,
        }
    }

    pub fn descent() -> Self {
        Self::new(Variant::Descent)
    }

    pub fn newton_opt() -> Self {
        Self::new(Variant::NewtonOpt)
    }

    pub fn newton_nle() -> Self {
        Self::new(Variant::NewtonNle)
    }

    pub fn validate(&self) -> Result<()> {
        let sigma_max = if self.variant == Variant::NewtonOpt { 0.5 } else { 1.0 };
        if !(self.sigma > 0.0 && self.sigma < sigma_max) {
            return Err(Error::InvalidConfig(format!(
                "sigma must lie in (0, {sigma_max}) for {}, got {}",
                self.variant, self.sigma
            )));
        }
        if !(self.backtrack_ratio > 0.0 && self.backtrack_ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "backtrack ratio must lie in (0, 1), got {}",
                self.backtrack_ratio
            )));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidConfig(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::newton_opt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepKind {
    Newton,
    Gradient,
    #[serde(rename = "LM")]
    Lm,
}

/// One iteration: the state at `x_k` and the step taken from it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub lambda: f64,
    pub res: f64,
    pub alpha: f64,
    pub backtracks: usize,
    pub step_kind: StepKind,
    /// `phi(x_k)` for the descent and optimization methods, `theta(x_k)`
    /// for the equation method, both on the tensor actually minimized.
    #[serde(skip)]
    pub phi_or_theta: f64,
    #[serde(skip)]
    pub point: UnitVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    LineSearchFailure,
    NumericalBreakdown,
}

impl SolveStatus {
    pub fn is_converged(self) -> bool {
        self == SolveStatus::Converged
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub eigenpair: Option<Eigenpair>,
    pub trace: Vec<IterationRecord>,
    /// Seconds.
    pub wall_time: f64,
    pub final_point: UnitVector,
    pub final_lambda: f64,
    pub final_res: f64,
}

impl SolveReport {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn non_newton_steps(&self) -> usize {
        self.trace.iter().filter(|r| r.step_kind != StepKind::Newton).count()
    }

    pub fn total_backtracks(&self) -> usize {
        self.trace.iter().map(|r| r.backtracks).sum()
    }

    /// `res_0, ..., res_K` including the final point.
    pub fn residual_history(&self) -> Vec<f64> {
        self.trace
            .iter()
            .map(|r| r.res)
            .chain(std::iter::once(self.final_res))
            .collect()
    }
}

struct Chosen {
    d: Vec<f64>,
    kind: StepKind,
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|a| a.is_finite())
}

fn choose_opt(x: &UnitVector, eval: &PointEval, cfg: &SolverConfig) -> Chosen {
    let jac = eval.jacobian();
    if let Ok(d) = direction::newton_from_eval(x, eval, &jac) {
        if direction::is_descent(&eval.residual, &d) {
            return Chosen { d, kind: StepKind::Newton };
        }
    }
    if cfg.fallback == Fallback::LevenbergMarquardt {
        if let Ok(d) = direction::lm_from_eval(eval, &jac, cfg.mu) {
            if direction::is_descent(&eval.residual, &d) {
                return Chosen { d, kind: StepKind::Lm };
            }
        }
    }
    Chosen {
        d: eval.residual.iter().map(|v| -v).collect(),
        kind: StepKind::Gradient,
    }
}

fn choose_nle(x: &UnitVector, eval: &PointEval, cfg: &SolverConfig, grad: &[f64]) -> Chosen {
    let jac = eval.jacobian();
    if let Ok(d) = direction::newton_from_eval(x, eval, &jac) {
        if direction::is_descent(grad, &d) {
            return Chosen { d, kind: StepKind::Newton };
        }
    }
    if cfg.fallback == Fallback::LevenbergMarquardt {
        if let Ok(d) = direction::lm_from_eval(eval, &jac, cfg.mu) {
            if direction::is_descent(grad, &d) {
                return Chosen { d, kind: StepKind::Lm };
            }
        }
    }
    Chosen {
        d: grad.iter().map(|v| -v).collect(),
        kind: StepKind::Gradient,
    }
}

/// Runs the configured method from `x0`.
///
/// Errors are reserved for invalid input; every outcome of the iteration
/// itself, including failure, is described by the returned report.
pub fn solve(t: &SymmetricTensor, x0: &UnitVector, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    if x0.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            got: x0.dim(),
        });
    }
    let start = Instant::now();
    let (work, sign) = if cfg.maximize {
        (Cow::Owned(t.negated()), -1.0)
    } else {
        (Cow::Borrowed(t), 1.0)
    };

    let mut x = x0.clone();
    let mut trace = Vec::new();
    let finish = |status: SolveStatus, x: UnitVector, eval: &PointEval, trace| {
        let lambda = sign * eval.lambda;
        SolveReport {
            status,
            eigenpair: status.is_converged().then(|| Eigenpair {
                x: x.clone(),
                lambda,
            }),
            trace,
            wall_time: start.elapsed().as_secs_f64(),
            final_point: x,
            final_lambda: lambda,
            final_res: eval.res_norm(),
        }
    };

    for k in 0..=cfg.max_iter {
        let eval = PointEval::new(&work, &x)?;
        if !eval.is_finite() {
            return Ok(finish(SolveStatus::NumericalBreakdown, x, &eval, trace));
        }
        let res = eval.res_norm();
        if res <= cfg.tol {
            return Ok(finish(SolveStatus::Converged, x, &eval, trace));
        }
        if k == cfg.max_iter {
            return Ok(finish(SolveStatus::MaxIterations, x, &eval, trace));
        }

        let (chosen, value, searched) = match cfg.variant {
            Variant::Descent => {
                let d = match &cfg.preconditioner {
                    Preconditioner::Identity => eval.residual.iter().map(|v| -v).collect(),
                    Preconditioner::Sequence(b) => {
                        direction::preconditioned_from_eval(&eval, &b(k, &x), k)?
                    }
                };
                let chosen = Chosen { d, kind: StepKind::Gradient };
                let searched = line_search::search_phi(&work, &eval, &chosen.d, cfg)?;
                (chosen, eval.phi(), searched)
            }
            Variant::NewtonOpt => {
                let chosen = choose_opt(&x, &eval, cfg);
                let searched = line_search::search_phi(&work, &eval, &chosen.d, cfg)?;
                (chosen, eval.phi(), searched)
            }
            Variant::NewtonNle => {
                let grad = eval.grad_theta(&eval.jacobian());
                let chosen = choose_nle(&x, &eval, cfg, &grad);
                let slope = dot(&grad, &chosen.d);
                let searched =
                    line_search::search_theta(&work, &x, eval.theta(), slope, &chosen.d, cfg)?;
                (chosen, eval.theta(), searched)
            }
        };
        if !all_finite(&chosen.d) {
            return Ok(finish(SolveStatus::NumericalBreakdown, x, &eval, trace));
        }
        let Ok(step) = searched else {
            return Ok(finish(SolveStatus::LineSearchFailure, x, &eval, trace));
        };
        let next = match retract(&x, &chosen.d, step.alpha) {
            Ok(next) => next,
            Err(_) => return Ok(finish(SolveStatus::NumericalBreakdown, x, &eval, trace)),
        };
        trace.push(IterationRecord {
            k,
            lambda: sign * eval.lambda,
            res,
            alpha: step.alpha,
            backtracks: step.backtracks,
            step_kind: chosen.kind,
            phi_or_theta: value,
            point: x,
        });
        x = next;
    }
    unreachable!("the loop returns at k == max_iter")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{random_unit, SignPattern};
    use crate::tensor::{make_problem, ProblemSpec};

    #[test]
    fn eigenvector_start_converges_immediately() {
        let t = make_problem(&ProblemSpec::p1()).unwrap();
        let x0 = UnitVector::new(vec![1.0, 1.0]).unwrap();
        for cfg in [SolverConfig::descent(), SolverConfig::newton_opt(), SolverConfig::newton_nle()] {
            let r = solve(&t, &x0, &cfg).unwrap();
            assert_eq!(r.status, SolveStatus::Converged);
            assert_eq!(r.iterations(), 0);
            let pair = r.eigenpair.unwrap();
            assert!((pair.lambda - (2.0 + 2.0 / 3f64.sqrt())).abs() < 1e-12);
            assert!((pair.lambda - 3.154701).abs() < 1e-6);
        }
    }

    #[test]
    fn maximize_flips_lambda() {
        let t = make_problem(&ProblemSpec::p1()).unwrap();
        let x0 = UnitVector::new(vec![1.0, 1.0]).unwrap();
        let cfg = SolverConfig {
            maximize: true,
            ..SolverConfig::newton_opt()
        };
        let r = solve(&t, &x0, &cfg).unwrap();
        assert!(r.final_lambda > 3.0);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            sigma: 0.6,
            ..SolverConfig::newton_opt()
        };
        assert!(bad.validate().is_err());
        let ok = SolverConfig {
            sigma: 0.6,
            ..SolverConfig::newton_nle()
        };
        assert!(ok.validate().is_ok());
        for cfg in [
            SolverConfig { backtrack_ratio: 1.0, ..SolverConfig::default() },
            SolverConfig { mu: 0.0, ..SolverConfig::default() },
            SolverConfig { tol: 0.0, ..SolverConfig::default() },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let t = make_problem(&ProblemSpec::p1()).unwrap();
        assert!(solve(&t, &UnitVector::basis(3, 0), &SolverConfig::default()).is_err());
    }

    #[test]
    fn max_iterations_reported() {
        let t = make_problem(&ProblemSpec::p3(8)).unwrap();
        let x0 = random_unit(2, 8, SignPattern::Nonpositive);
        let cfg = SolverConfig {
            max_iter: 2,
            ..SolverConfig::descent()
        };
        let r = solve(&t, &x0, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::MaxIterations);
        assert_eq!(r.iterations(), 2);
        assert!(r.eigenpair.is_none());
        assert_eq!(r.residual_history().len(), 3);
    }

    #[test]
    fn line_search_failure_keeps_trace() {
        let t = make_problem(&ProblemSpec::p3(8)).unwrap();
        let x0 = random_unit(2, 8, SignPattern::Nonpositive);
        let cfg = SolverConfig {
            max_backtracks: 0,
            preconditioner: Preconditioner::Sequence(Arc::new(|_, x| {
                let mut b = DenseMatrix::identity(x.dim());
                b.scale(1e-3);
                b
            })),
            ..SolverConfig::descent()
        };
        let r = solve(&t, &x0, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::LineSearchFailure);
        assert!(r.eigenpair.is_none());
    }

    #[test]
    fn bad_preconditioner_is_an_error() {
        let t = make_problem(&ProblemSpec::p1()).unwrap();
        let cfg = SolverConfig {
            preconditioner: Preconditioner::Sequence(Arc::new(|_, x| {
                let mut b = DenseMatrix::identity(x.dim());
                b.scale(-1.0);
                b
            })),
            ..SolverConfig::descent()
        };
        assert!(matches!(
            solve(&t, &UnitVector::basis(2, 0), &cfg),
            Err(Error::NotPositiveDefinite(0))
        ));
    }

    #[test]
    fn trace_serializes_with_expected_fields() {
        let t = make_problem(&ProblemSpec::p1()).unwrap();
        let r = solve(&t, &UnitVector::basis(2, 0), &SolverConfig::newton_nle()).unwrap();
        assert!(!r.trace.is_empty());
        let json = serde_json::to_value(&r.trace[0]).unwrap();
        let mut keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["alpha", "backtracks", "k", "lambda", "res", "step_kind"]);
    }
}
