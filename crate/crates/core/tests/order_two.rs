use nalgebra::{DMatrix, SymmetricEigen};
use zeigen::linalg::{is_positive_definite, solve as linear_solve};
use zeigen::solver::{solve, SolverConfig, Variant};
use zeigen::sphere::{random_unit, SignPattern};
use zeigen::tensor::{make_problem, ProblemSpec};
use zeigen::DenseMatrix;

fn random_symmetric(seed: u64, n: usize) -> DenseMatrix {
    let raw = random_unit(seed, n * n, SignPattern::Unrestricted);
    DenseMatrix::from_row_major(n, n, raw.iter().map(|v| 4.0 * v).collect()).symmetric_part()
}

fn eig(a: &DenseMatrix) -> SymmetricEigen<f64, nalgebra::Dyn> {
    SymmetricEigen::new(DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice()))
}

#[test]
fn newton_methods_find_matrix_eigenpairs() {
    for variant in [Variant::NewtonOpt, Variant::NewtonNle] {
        for seed in 0..20 {
            let a = random_symmetric(300 + seed, 5);
            let t = make_problem(&ProblemSpec::matrix(a.clone())).unwrap();
            let r = solve(&t, &random_unit(seed, 5, SignPattern::Unrestricted), &SolverConfig::new(variant)).unwrap();
            let Some(pair) = r.eigenpair else { continue };
            let e = eig(&a);
            let j = (0..5)
                .min_by(|&p, &q| {
                    (e.eigenvalues[p] - pair.lambda).abs().total_cmp(&(e.eigenvalues[q] - pair.lambda).abs())
                })
                .unwrap();
            assert!((e.eigenvalues[j] - pair.lambda).abs() <= 1e-8);
            let v = e.eigenvectors.column(j);
            let dot: f64 = pair.x.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            assert!(1.0 - dot.abs() <= 1e-12);
        }
    }
}

#[test]
fn minimizing_descent_reaches_smallest_eigenvalue_from_most_starts() {
    let a = random_symmetric(77, 5);
    let t = make_problem(&ProblemSpec::matrix(a.clone())).unwrap();
    let smallest = eig(&a).eigenvalues.min();
    let cfg = SolverConfig { max_iter: 5000, ..SolverConfig::new(Variant::Descent) };
    let hits = (0..20)
        .filter_map(|s| solve(&t, &random_unit(s, 5, SignPattern::Unrestricted), &cfg).unwrap().eigenpair)
        .filter(|p| (p.lambda - smallest).abs() <= 1e-8)
        .count();
    assert!(hits >= 15, "{hits}");
}

#[test]
fn positive_definiteness_agrees_with_eigenvalues() {
    for seed in 0..40 {
        let mut a = random_symmetric(seed, 4);
        a.shift_diagonal(1.5);
        let min = eig(&a).eigenvalues.min();
        if min.abs() > 1e-6 {
            assert_eq!(is_positive_definite(&a), min > 0.0, "seed {seed}, min eigenvalue {min}");
        }
    }
}

#[test]
fn linear_solve_agrees_with_lu() {
    for seed in 0..20 {
        let raw = random_unit(seed, 36, SignPattern::Unrestricted);
        let a = DenseMatrix::from_row_major(6, 6, raw.to_vec());
        let b = random_unit(seed + 100, 6, SignPattern::Unrestricted);
        let z = linear_solve(&a, &b).unwrap();
        let oracle = DMatrix::from_row_slice(6, 6, a.as_slice())
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&b))
            .unwrap();
        for i in 0..6 {
            assert!((z[i] - oracle[i]).abs() <= 1e-9 * (1.0 + oracle[i].abs()));
        }
    }
}
