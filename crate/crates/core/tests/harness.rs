use zeigen::harness::{run_batch, AggregateStats, TrialBatch};
use zeigen::render::{csv, Row};
use zeigen::solver::{SolverConfig, Variant};
use zeigen::tensor::ProblemSpec;

fn without_cpu(s: &AggregateStats) -> AggregateStats {
    AggregateStats { cpu: 0.0, ..s.clone() }
}

#[test]
fn same_seed_same_results() {
    let mut batch = TrialBatch::new(ProblemSpec::p4(6), SolverConfig::new(Variant::NewtonOpt));
    batch.trials = 25;
    batch.base_seed = 123;
    let a = run_batch(&batch, 1).unwrap();
    let b = run_batch(&batch, 3).unwrap();
    assert_eq!(without_cpu(&a.stats), without_cpu(&b.stats));
    for (x, y) in a.trials.iter().zip(&b.trials) {
        assert_eq!(x.report.trace, y.report.trace);
        assert_eq!(x.report.status, y.report.status);
    }
}

#[test]
fn any_trial_reproduces_alone() {
    let mut batch = TrialBatch::new(ProblemSpec::p3(9), SolverConfig::new(Variant::NewtonNle));
    batch.trials = 8;
    batch.base_seed = 50;
    let all = run_batch(&batch, 0).unwrap();
    let mut single = batch.clone();
    single.trials = 1;
    single.base_seed = 55;
    let one = run_batch(&single, 0).unwrap();
    assert_eq!(one.trials[0].report.trace, all.trials[5].report.trace);
}

#[test]
fn eigenvector_start_counts_zero_iterations() {
    // A 1-dimensional problem starts at an eigenvector for every seed.
    let mut batch = TrialBatch::new(ProblemSpec::p4(1), SolverConfig::new(Variant::NewtonOpt));
    batch.trials = 1;
    let out = run_batch(&batch, 1).unwrap();
    assert_eq!(out.trials[0].report.final_point.as_slice(), &[-1.0]);
    assert_eq!((out.stats.iter, out.stats.in_iter, out.stats.suc_pct), (0.0, 0.0, 100.0));
}

#[test]
fn stats_are_means_over_successes() {
    let cfg = SolverConfig { max_iter: 6, ..SolverConfig::new(Variant::NewtonNle) };
    let mut batch = TrialBatch::new(ProblemSpec::p3(10), cfg);
    batch.trials = 30;
    let out = run_batch(&batch, 0).unwrap();
    let ok: Vec<_> = out.trials.iter().filter(|t| t.report.status.is_converged()).collect();
    assert!(!ok.is_empty() && ok.len() < 30, "{}", ok.len());
    let mean = ok.iter().map(|t| t.report.iterations() as f64).sum::<f64>() / ok.len() as f64;
    assert_eq!(out.stats.iter, mean);
    assert!(out.stats.res <= 1e-10);
    assert_eq!(out.stats.eigenvalues.iter().map(|c| c.count).sum::<usize>(), ok.len());
}

#[test]
fn csv_rows_repeat_exactly() {
    let mut batch = TrialBatch::new(ProblemSpec::p2(), SolverConfig { maximize: true, ..SolverConfig::newton_opt() });
    batch.trials = 20;
    let render = || {
        let out = run_batch(&batch, 0).unwrap();
        let stats = AggregateStats { cpu: 0.0, ..out.stats };
        csv(&[Row { alg: Variant::NewtonOpt, problem: "P2".into(), n: out.dim, stats: &stats }])
    };
    assert_eq!(render(), render());
}
