use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zeigen::harness::{default_maximize, default_start_sign, run_batch, TrialBatch};
use zeigen::render::{self, Row};
use zeigen::solver::{solve, Fallback, SolveStatus, SolverConfig, Variant};
use zeigen::sphere::{random_unit, SignPattern};
use zeigen::tensor::{make_problem_capped, store_tensor, ProblemSpec, DEFAULT_MAX_ENTRIES};

const THREADS_VAR: &str = "ZEIGEN_THREADS";

#[derive(Parser)]
#[command(name = "zeigen", version, about = "Z-eigenpairs of symmetric tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve from a seeded random start.
    Solve(SolveArgs),
    /// Run a seeded batch and print its statistics row.
    Bench(BenchArgs),
    /// Write a test problem to a .stsr file.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    P1,
    P2,
    P3,
    P4,
    P5,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgArg {
    Descent,
    NewtonOpt,
    NewtonNle,
}

#[derive(Clone, Copy, ValueEnum)]
enum FallbackArg {
    Lm,
    Gradient,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Nonnegative,
    Nonpositive,
    Unrestricted,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Markdown,
    Csv,
    Json,
}

#[derive(Args)]
struct ProblemArgs {
    /// Built-in test problem.
    #[arg(long, value_enum, ignore_case = true, required_unless_present = "tensor")]
    problem: Option<ProblemArg>,
    /// Dimension for P3 to P5.
    #[arg(long)]
    dim: Option<usize>,
    /// Load the tensor from a .stsr file instead.
    #[arg(long, conflicts_with_all = ["problem", "dim"])]
    tensor: Option<PathBuf>,
    /// Upper bound on dense tensor entries.
    #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
    max_entries: usize,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "newton-opt")]
    alg: AlgArg,
    /// Look for the largest eigenvalue (default for P1 and P2).
    #[arg(long, conflicts_with = "minimize")]
    maximize: bool,
    /// Look for the smallest eigenvalue (default otherwise).
    #[arg(long)]
    minimize: bool,
    /// Sign pattern of random starts; defaults by problem.
    #[arg(long, value_enum)]
    start: Option<StartArg>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Backtracking ratio.
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    max_backtracks: Option<usize>,
    #[arg(long, value_enum)]
    fallback: Option<FallbackArg>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the iteration trace as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long, value_enum, default_value = "markdown")]
    format: Format,
    /// Write to a file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, ignore_case = true)]
    problem: ProblemArg,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
    max_entries: usize,
}

fn builtin(p: ProblemArg, dim: Option<usize>) -> ProblemSpec {
    let mut spec = match p {
        ProblemArg::P1 => ProblemSpec::p1(),
        ProblemArg::P2 => ProblemSpec::p2(),
        ProblemArg::P3 => ProblemSpec::p3(0),
        ProblemArg::P4 => ProblemSpec::p4(0),
        ProblemArg::P5 => ProblemSpec::p5(0),
    };
    if dim.is_some() || matches!(p, ProblemArg::P3 | ProblemArg::P4 | ProblemArg::P5) {
        spec.dim = dim;
    }
    spec
}

impl ProblemArgs {
    fn spec(&self) -> ProblemSpec {
        match (&self.tensor, self.problem) {
            (Some(path), _) => ProblemSpec::file(path),
            (None, Some(p)) => builtin(p, self.dim),
            (None, None) => unreachable!("clap requires --problem or --tensor"),
        }
    }
}

impl SolverArgs {
    fn config(&self, problem: &ProblemSpec) -> SolverConfig {
        let variant = match self.alg {
            AlgArg::Descent => Variant::Descent,
            AlgArg::NewtonOpt => Variant::NewtonOpt,
            AlgArg::NewtonNle => Variant::NewtonNle,
        };
        let mut cfg = SolverConfig::new(variant);
        cfg.maximize = if self.maximize {
            true
        } else if self.minimize {
            false
        } else {
            default_maximize(problem)
        };
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.ratio {
            cfg.backtrack_ratio = v;
        }
        if let Some(v) = self.mu {
            cfg.mu = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.max_backtracks {
            cfg.max_backtracks = v;
        }
        if let Some(f) = self.fallback {
            cfg.fallback = match f {
                FallbackArg::Lm => Fallback::LevenbergMarquardt,
                FallbackArg::Gradient => Fallback::Gradient,
            };
        }
        cfg
    }

    fn start(&self, problem: &ProblemSpec) -> SignPattern {
        match self.start {
            Some(StartArg::Nonnegative) => SignPattern::Nonnegative,
            Some(StartArg::Nonpositive) => SignPattern::Nonpositive,
            Some(StartArg::Unrestricted) => SignPattern::Unrestricted,
            None => default_start_sign(problem),
        }
    }
}

enum Failure {
    Usage(String),
    NotConverged,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn threads() -> Result<usize, Failure> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{THREADS_VAR} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn run_solve(args: &SolveArgs) -> Result<(), Failure> {
    let spec = args.problem.spec();
    let tensor = make_problem_capped(&spec, args.problem.max_entries)?;
    let cfg = args.solver.config(&spec);
    let x0 = random_unit(args.seed, tensor.dim(), args.solver.start(&spec));
    let report = solve(&tensor, &x0, &cfg)?;
    println!("lambda = {:.10}", report.final_lambda);
    println!("Res = {:.2e}", report.final_res);
    println!("iterations = {}", report.iterations());
    println!("status = {:?}", report.status);
    if let Some(path) = &args.trace {
        fs::write(path, render::trace_json(&report.trace)? + "\n")?;
    }
    match report.status {
        SolveStatus::Converged => Ok(()),
        _ => Err(Failure::NotConverged),
    }
}

fn run_bench(args: &BenchArgs) -> Result<(), Failure> {
    let spec = args.problem.spec();
    let mut batch = TrialBatch::new(spec.clone(), args.solver.config(&spec));
    batch.trials = args.trials;
    batch.base_seed = args.base_seed;
    batch.start_sign = args.solver.start(&spec);
    batch.max_entries = args.problem.max_entries;
    let outcome = run_batch(&batch, threads()?)?;
    let rows = [Row {
        alg: batch.config.variant,
        problem: spec.to_string(),
        n: outcome.dim,
        stats: &outcome.stats,
    }];
    let text = match args.format {
        Format::Markdown => render::markdown(&rows),
        Format::Csv => render::csv(&rows),
        Format::Json => render::json(&rows)? + "\n",
    };
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_gen(args: &GenArgs) -> Result<(), Failure> {
    let spec = builtin(args.problem, args.dim);
    let tensor = make_problem_capped(&spec, args.max_entries)?;
    store_tensor(&tensor, &args.out)?;
    println!(
        "wrote {} (order {}, dim {})",
        args.out.display(),
        tensor.order(),
        tensor.dim()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Bench(args) => run_bench(args),
        Command::Gen(args) => run_gen(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotConverged) => ExitCode::from(2),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
