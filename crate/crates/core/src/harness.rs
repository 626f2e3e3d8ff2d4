//! Seeded batches of random starts and the per-batch statistics reported in
//! the result tables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::{solve, SolveReport, SolverConfig};
use crate::sphere::{random_unit, SignPattern};
use crate::tensor::{make_problem_capped, ProblemId, ProblemSpec, DEFAULT_MAX_ENTRIES};

/// Eigenvalues closer than this are counted as the same limit.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Nonnegative starts for P1 and P2, nonpositive for P3 to P5 and
/// unrestricted for user tensors.
pub fn default_start_sign(problem: &ProblemSpec) -> SignPattern {
    match problem.id {
        ProblemId::P1 | ProblemId::P2 => SignPattern::Nonnegative,
        ProblemId::P3 | ProblemId::P4 | ProblemId::P5 => SignPattern::Nonpositive,
        ProblemId::File(_) | ProblemId::Matrix(_) => SignPattern::Unrestricted,
    }
}

/// P1 and P2 are benchmarked for their largest eigenvalue, the rest in the
/// minimization form.
pub fn default_maximize(problem: &ProblemSpec) -> bool {
    matches!(problem.id, ProblemId::P1 | ProblemId::P2)
}

#[derive(Clone, Debug)]
pub struct TrialBatch {
    pub problem: ProblemSpec,
    pub config: SolverConfig,
    pub trials: usize,
    pub base_seed: u64,
    pub start_sign: SignPattern,
    pub max_entries: usize,
}

impl TrialBatch {
    /// 100 trials from seed 0 with the problem's default start sign. The
    /// objective sense is taken from `config` as given.
    pub fn new(problem: ProblemSpec, config: SolverConfig) -> Self {
        let start_sign = default_start_sign(&problem);
        Self {
            problem,
            config,
            trials: 100,
            base_seed: 0,
            start_sign,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }

    pub fn seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub count: usize,
}

/// Single-linkage clusters of `lambdas` on the real line, in increasing
/// order, each represented by its mean.
pub fn cluster_eigenvalues(lambdas: &[f64], tol_cluster: f64) -> Vec<Cluster> {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut clusters: Vec<(f64, usize, f64)> = Vec::new();
    for v in sorted {
        match clusters.last_mut() {
            Some((sum, count, last)) if v - *last <= tol_cluster => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => clusters.push((v, 1, v)),
        }
    }
    clusters
        .into_iter()
        .map(|(sum, count, _)| Cluster {
            value: sum / count as f64,
            count,
        })
        .collect()
}

/// Means are over successful trials only; they are NaN when there are none.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateStats {
    pub trials: usize,
    pub successes: usize,
    pub iter: f64,
    pub iter_n: f64,
    pub in_iter: f64,
    pub cpu: f64,
    pub res: f64,
    pub suc_pct: f64,
    pub occ_pct: f64,
    pub eigenvalues: Vec<Cluster>,
}

impl AggregateStats {
    pub fn from_reports<'a>(reports: impl IntoIterator<Item = &'a SolveReport>) -> Self {
        let mut trials = 0;
        let mut ok = Vec::new();
        for r in reports {
            trials += 1;
            if r.status.is_converged() {
                ok.push(r);
            }
        }
        let mean = |f: &dyn Fn(&SolveReport) -> f64| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
            }
        };
        let lambdas: Vec<f64> = ok.iter().map(|r| r.final_lambda).collect();
        let eigenvalues = cluster_eigenvalues(&lambdas, CLUSTER_TOL);
        let occ_pct = match eigenvalues.last() {
            Some(top) => 100.0 * top.count as f64 / ok.len() as f64,
            None => f64::NAN,
        };
        Self {
            trials,
            successes: ok.len(),
            iter: mean(&|r| r.iterations() as f64),
            iter_n: mean(&|r| r.non_newton_steps() as f64),
            in_iter: mean(&|r| r.total_backtracks() as f64),
            cpu: mean(&|r| r.wall_time),
            res: mean(&|r| r.final_res),
            suc_pct: if trials == 0 {
                f64::NAN
            } else {
                100.0 * ok.len() as f64 / trials as f64
            },
            occ_pct,
            eigenvalues,
        }
    }

    /// Largest eigenvalue found, if any run succeeded.
    pub fn lambda_max(&self) -> Option<f64> {
        self.eigenvalues.last().map(|c| c.value)
    }
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub report: SolveReport,
}

#[derive(Clone, Debug)]
pub struct BatchOutcome {
    pub dim: usize,
    pub stats: AggregateStats,
    pub trials: Vec<TrialOutcome>,
}

/// Runs every trial of `batch` on up to `threads` workers (0 picks the
/// number of CPUs). Results do not depend on the degree of parallelism.
pub fn run_batch(batch: &TrialBatch, threads: usize) -> Result<BatchOutcome> {
    use rayon::prelude::*;

    if batch.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    batch.config.validate()?;
    let tensor = make_problem_capped(&batch.problem, batch.max_entries)?;
    let dim = tensor.dim();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let trials = pool.install(|| {
        (0..batch.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = batch.seed(trial);
                let x0 = random_unit(seed, dim, batch.start_sign);
                solve(&tensor, &x0, &batch.config).map(|report| TrialOutcome {
                    trial,
                    seed,
                    report,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let stats = AggregateStats::from_reports(trials.iter().map(|t| &t.report));
    Ok(BatchOutcome { dim, stats, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{SolveStatus, Variant};

    #[test]
    fn clustering_examples() {
        let c = cluster_eigenvalues(&[3.1754, 3.1754 + 1e-9, 3.1547], 1e-6);
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].count, c[1].count), (1, 2));
        assert_eq!(c[0].value, 3.1547);
        assert!((c[1].value - (3.1754 + 5e-10)).abs() < 1e-15);

        assert!(cluster_eigenvalues(&[], 1e-6).is_empty());

        let same = cluster_eigenvalues(&[2.0; 7], 1e-6);
        assert_eq!(same, vec![Cluster { value: 2.0, count: 7 }]);
    }

    #[test]
    fn single_linkage_chains() {
        let c = cluster_eigenvalues(&[0.0, 0.8e-6, 1.6e-6, 1.0], 1e-6);
        assert_eq!(c.iter().map(|c| c.count).collect::<Vec<_>>(), vec![3, 1]);
    }

    #[test]
    fn clustering_ignores_order() {
        let a = cluster_eigenvalues(&[1.0, 5.0, 1.0 + 1e-8, 3.0, 5.0], 1e-6);
        let b = cluster_eigenvalues(&[5.0, 3.0, 5.0, 1.0 + 1e-8, 1.0], 1e-6);
        assert_eq!(a, b);
    }

    #[test]
    fn default_signs() {
        assert_eq!(default_start_sign(&ProblemSpec::p1()), SignPattern::Nonnegative);
        assert_eq!(default_start_sign(&ProblemSpec::p2()), SignPattern::Nonnegative);
        for p in [ProblemSpec::p3(4), ProblemSpec::p4(4), ProblemSpec::p5(4)] {
            assert_eq!(default_start_sign(&p), SignPattern::Nonpositive);
            assert!(!default_maximize(&p));
        }
        assert!(default_maximize(&ProblemSpec::p1()));
    }

    #[test]
    fn seeds_follow_trial_index() {
        let mut batch = TrialBatch::new(ProblemSpec::p1(), SolverConfig::newton_opt());
        batch.trials = 5;
        batch.base_seed = 40;
        let out = run_batch(&batch, 2).unwrap();
        let seeds: Vec<u64> = out.trials.iter().map(|t| t.seed).collect();
        assert_eq!(seeds, vec![40, 41, 42, 43, 44]);
        assert_eq!(out.dim, 2);
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let mut batch = TrialBatch::new(ProblemSpec::p3(6), SolverConfig::newton_nle());
        batch.trials = 12;
        batch.base_seed = 9;
        let one = run_batch(&batch, 1).unwrap();
        let four = run_batch(&batch, 4).unwrap();
        for (a, b) in one.trials.iter().zip(&four.trials) {
            assert_eq!(a.report.trace, b.report.trace);
            assert_eq!(a.report.final_point, b.report.final_point);
        }
        let strip = |s: &AggregateStats| AggregateStats { cpu: 0.0, ..s.clone() };
        assert_eq!(strip(&one.stats), strip(&four.stats));
    }

    #[test]
    fn success_rate_is_exact() {
        let mut batch = TrialBatch::new(
            ProblemSpec::p3(8),
            SolverConfig {
                max_iter: 3,
                ..SolverConfig::new(Variant::Descent)
            },
        );
        batch.trials = 10;
        let out = run_batch(&batch, 0).unwrap();
        let converged = out
            .trials
            .iter()
            .filter(|t| t.report.status == SolveStatus::Converged)
            .count();
        assert_eq!(out.stats.suc_pct, 100.0 * converged as f64 / 10.0);
        assert_eq!(out.stats.successes, converged);
    }

    #[test]
    fn empty_success_set_gives_nan_means() {
        let stats = AggregateStats::from_reports(std::iter::empty());
        assert_eq!(stats.trials, 0);
        assert!(stats.iter.is_nan() && stats.occ_pct.is_nan() && stats.suc_pct.is_nan());
    }

    #[test]
    fn zero_trials_rejected() {
        let mut batch = TrialBatch::new(ProblemSpec::p1(), SolverConfig::default());
        batch.trials = 0;
        assert!(run_batch(&batch, 1).is_err());
    }
}
