//! Table, CSV and JSON output for batch statistics and solver traces.

use serde::Serialize;

use crate::harness::AggregateStats;
use crate::solver::{IterationRecord, Variant};

pub const COLUMNS: [&str; 11] = [
    "Alg.", "Prob.", "n", "lambda*", "iter", "iter-n", "in-iter", "Cpu", "Res", "suc%", "Occ.%",
];

/// Explains the columns whose meaning is not evident from the label.
pub const LEGEND: &str = "iter-n: iterations without a Newton step; in-iter: total backtracking \
steps per run; lambda*: largest eigenvalue found; Occ.%: share of successful runs reaching lambda*; \
iter, iter-n, in-iter, Cpu (seconds) and Res are means over successful runs.";

/// One table row: a batch of `alg` on problem `problem` of dimension `n`.
#[derive(Clone, Debug, Serialize)]
pub struct Row<'a> {
    pub alg: Variant,
    pub problem: String,
    pub n: usize,
    pub stats: &'a AggregateStats,
}

/// `x` with four significant digits; `-` for NaN.
pub fn sig4(x: f64) -> String {
    if x.is_nan() {
        return "-".into();
    }
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = |v: f64| (3 - v.abs().log10().floor() as i32).max(0) as usize;
    let mut d = decimals(x);
    let s = format!("{x:.d$}");
    // Rounding may carry into a new leading digit, e.g. 9.9996 -> 10.000.
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded != 0.0 && decimals(rounded) < d {
        d = decimals(rounded);
        return format!("{rounded:.d$}");
    }
    s
}

/// Two-digit scientific notation; `-` for NaN.
pub fn sci2(x: f64) -> String {
    if x.is_nan() {
        "-".into()
    } else {
        format!("{x:.2e}")
    }
}

impl Row<'_> {
    /// The formatted cells, shared by every text format.
    pub fn cells(&self) -> [String; 11] {
        let s = self.stats;
        [
            self.alg.label().to_string(),
            self.problem.clone(),
            self.n.to_string(),
            s.lambda_max().map_or("-".into(), |l| format!("{l:.4}")),
            sig4(s.iter),
            sig4(s.iter_n),
            sig4(s.in_iter),
            sig4(s.cpu),
            sci2(s.res),
            sig4(s.suc_pct),
            sig4(s.occ_pct),
        ]
    }
}

pub fn markdown(rows: &[Row]) -> String {
    let mut out = format!("| {} |\n", COLUMNS.join(" | "));
    out.push_str(&format!("|{}\n", "---|".repeat(COLUMNS.len())));
    for row in rows {
        out.push_str(&format!("| {} |\n", row.cells().join(" | ")));
    }
    out.push('\n');
    out.push_str(LEGEND);
    out.push('\n');
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv(rows: &[Row]) -> String {
    let line = |cells: &[String]| cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
    let header: Vec<String> = COLUMNS.iter().map(|c| c.to_string()).collect();
    let mut out = line(&header);
    out.push('\n');
    for row in rows {
        out.push_str(&line(&row.cells()));
        out.push('\n');
    }
    out
}

/// Unformatted values; NaN means become `null`.
pub fn json(rows: &[Row]) -> serde_json::Result<String> {
    serde_json::to_string_pretty(rows)
}

/// The trace as an array of objects with fields `k`, `lambda`, `res`,
/// `alpha`, `backtracks` and `step_kind`.
pub fn trace_json(trace: &[IterationRecord]) -> serde_json::Result<String> {
    serde_json::to_string_pretty(trace)
}
