//! Experiment suites: parameter studies, gap-size scaling, degenerate
//! deflation, and per-bit convergence traces.
//!
//! Each suite runs a deterministic grid of independent solves (cells run in
//! parallel, capped by `QUBO_EIG_THREADS`), writes every raw row, and then a
//! per-cell summary. Summary columns follow a fixed convention — the group
//! columns, `runs`, `converged`, then `mean_<metric>` over converged rows —
//! so `verify_summary` can recompute any summary from its raw file.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};

use qubo_eigen::deflate;
use qubo_eigen::eigensolver::{
    jacobi::jacobi_oracle, EigenResult, InitialLambda, OracleReference, SolveOptions, StopRule,
};
use qubo_eigen::matgen::{gap_matrix, load_matrix_market, marchenko_pastur};
use qubo_eigen::matrix::{dot, SymMatrix};
use qubo_eigen::{solve_smallest, Error, SamplerConfig};

use crate::output::{fmt_opt, trace_csv, write_atomic};

const PARAMS_MAT_SEED_BASE: u64 = 7000;
const GAP_MAT_SEED_BASE: u64 = 2000;
const DEGENERATE_MAT_SEED_BASE: u64 = 5000;
const BITS_SWEEP_MAT_SEED: u64 = 42;
const SUITE_MAX_ITERATIONS: usize = 3000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    /// Guess-phase error and iteration counts across bits, response mode
    /// and bias (sizes x bits x {best, full-response} x {alpha 0, .1}).
    Params,
    /// Iterations to the true eigenvalue as a function of the bottom gap.
    Gap,
    /// Two-run deflation protocol on fully degenerate matrices.
    Degenerate,
    /// Convergence traces across bit counts for one fixed matrix.
    BitsSweep,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub suite: SuiteArg,
    /// Matrix sizes (params suite). Default: 3,10,20.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Bit counts. Defaults: params/bits-sweep 2,4,6,8; gap 2,4.
    #[arg(long, value_delimiter = ',')]
    pub bits: Option<Vec<u32>>,
    /// Seeds per cell. Defaults: params/degenerate 10, gap 30, bits-sweep 5.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Gap grid for the gap suite.
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.1,0.5,1")]
    pub gaps: Vec<f64>,
    /// Dimension for the gap / degenerate / bits-sweep suites.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Marchenko-Pastur ratio for generated matrices.
    #[arg(long, default_value_t = 0.3)]
    pub ratio: f64,
    /// Metropolis sweeps per read.
    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,
    /// Annealer restarts per QUBO.
    #[arg(long, default_value_t = 32)]
    pub reads: usize,
    /// Fixed matrix for the bits-sweep suite (defaults to a seeded MP matrix).
    #[arg(long, value_name = "FILE")]
    pub mtx: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl ExperimentArgs {
    fn seeds(&self, default: u64) -> u64 {
        self.seeds.unwrap_or(default)
    }

    fn bits_list(&self, default: &[u32]) -> Vec<u32> {
        self.bits.clone().unwrap_or_else(|| default.to_vec())
    }

    fn sampler(&self, seed: u64) -> SamplerConfig {
        SamplerConfig {
            num_reads: self.reads,
            sweeps: self.sweeps,
            seed,
            ..Default::default()
        }
    }
}

/// Parallel cell cap: `QUBO_EIG_THREADS`, else the available parallelism.
fn thread_cap() -> usize {
    if let Ok(v) = std::env::var("QUBO_EIG_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs one closure per cell on a small worker pool; results keep cell order
/// regardless of scheduling.
fn run_parallel<C: Sync, R: Send>(cells: &[C], f: impl Fn(&C) -> R + Sync) -> Vec<R> {
    let threads = thread_cap().min(cells.len().max(1));
    if threads <= 1 {
        return cells.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = cells.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let r = f(&cells[i]);
                *slots[i].lock().expect("result slot poisoned") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot poisoned").expect("cell ran"))
        .collect()
}

/// Solve that treats max-iteration exhaustion as a non-converged row rather
/// than a suite failure.
fn solve_row(a: &SymMatrix, opts: &SolveOptions) -> Result<(EigenResult, bool)> {
    match solve_smallest(a, opts) {
        Ok(res) => Ok((res, true)),
        Err(Error::ConvergenceFailure { best, .. }) => Ok((*best, false)),
        Err(e) => Err(e.into()),
    }
}

// ---------------------------------------------------------------------------
// CSV plumbing shared by all suites

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .context("empty CSV")?
            .split(',')
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for (no, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
            if row.len() != header.len() {
                bail!(
                    "CSV row {} has {} fields, header has {}",
                    no + 2,
                    row.len(),
                    header.len()
                );
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    fn col(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("column '{name}' missing"))
    }
}

/// Builds the per-cell summary from raw rows: group columns, `runs`,
/// `converged`, then the mean of each metric over converged rows.
fn summarize(raw: &Table, group_cols: &[&str], metric_cols: &[&str]) -> Result<Table> {
    let gidx: Vec<usize> = group_cols
        .iter()
        .map(|c| raw.col(c))
        .collect::<Result<_>>()?;
    let midx: Vec<usize> = metric_cols
        .iter()
        .map(|c| raw.col(c))
        .collect::<Result<_>>()?;
    let cidx = raw.col("converged")?;

    let mut header: Vec<&str> = group_cols.to_vec();
    header.push("runs");
    header.push("converged");
    let mean_names: Vec<String> = metric_cols.iter().map(|m| format!("mean_{m}")).collect();
    let mut header: Vec<String> = header.into_iter().map(|s| s.to_string()).collect();
    header.extend(mean_names);

    // group keys in order of first appearance
    let mut keys: Vec<Vec<String>> = Vec::new();
    let mut stats: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for row in &raw.rows {
        let key: Vec<String> = gidx.iter().map(|&i| row[i].clone()).collect();
        let pos = match keys.iter().position(|k| *k == key) {
            Some(p) => p,
            None => {
                keys.push(key);
                stats.push((0, 0, vec![0.0; midx.len()]));
                keys.len() - 1
            }
        };
        let entry = &mut stats[pos];
        entry.0 += 1;
        if row[cidx] == "true" {
            entry.1 += 1;
            for (slot, &i) in entry.2.iter_mut().zip(&midx) {
                let v: f64 = row[i]
                    .parse()
                    .with_context(|| format!("bad metric value '{}'", row[i]))?;
                *slot += v;
            }
        }
    }

    let mut out = Table {
        header,
        rows: Vec::new(),
    };
    for (key, (runs, conv, sums)) in keys.into_iter().zip(stats) {
        let mut row = key;
        row.push(runs.to_string());
        row.push(conv.to_string());
        for s in sums {
            if conv > 0 {
                row.push((s / conv as f64).to_string());
            } else {
                row.push(String::new());
            }
        }
        out.rows.push(row);
    }
    Ok(out)
}

/// Recomputes the summary from the raw CSV on disk and compares it against
/// the stored summary. Numeric columns must agree to 1e-9 relative.
pub fn verify_summary(
    raw_path: &Path,
    summary_path: &Path,
    group_cols: &[&str],
    metric_cols: &[&str],
) -> Result<()> {
    let raw = Table::parse(&std::fs::read_to_string(raw_path)?)?;
    let stored = Table::parse(&std::fs::read_to_string(summary_path)?)?;
    let recomputed = summarize(&raw, group_cols, metric_cols)?;
    if stored.header != recomputed.header {
        bail!(
            "summary header mismatch: stored {:?} vs recomputed {:?}",
            stored.header,
            recomputed.header
        );
    }
    if stored.rows.len() != recomputed.rows.len() {
        bail!(
            "summary row count mismatch: {} vs {}",
            stored.rows.len(),
            recomputed.rows.len()
        );
    }
    for (s_row, r_row) in stored.rows.iter().zip(&recomputed.rows) {
        for (col, (s, r)) in s_row.iter().zip(r_row).enumerate() {
            let equal = if s == r {
                true
            } else {
                match (s.parse::<f64>(), r.parse::<f64>()) {
                    (Ok(a), Ok(b)) => (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0),
                    _ => false,
                }
            };
            if !equal {
                bail!(
                    "summary mismatch in column '{}': stored '{s}' vs recomputed '{r}'",
                    stored.header[col]
                );
            }
        }
    }
    Ok(())
}

fn write_suite_outputs(
    out_dir: &Path,
    suite: &str,
    raw: &Table,
    group_cols: &[&str],
    metric_cols: &[&str],
) -> Result<(PathBuf, PathBuf)> {
    let raw_path = out_dir.join(format!("{suite}_raw.csv"));
    let summary_path = out_dir.join(format!("{suite}_summary.csv"));
    write_atomic(&raw_path, &raw.to_csv())?;
    let summary = summarize(raw, group_cols, metric_cols)?;
    write_atomic(&summary_path, &summary.to_csv())?;
    // self-check: the stored summary must be recomputable from the raw rows
    verify_summary(&raw_path, &summary_path, group_cols, metric_cols)?;
    Ok((raw_path, summary_path))
}

// ---------------------------------------------------------------------------
// params suite

pub const PARAMS_GROUP: &[&str] = &["suite", "n", "bits", "response", "alpha"];
pub const PARAMS_METRICS: &[&str] = &["iterations", "guess_evec_err", "eval_err", "anneal_s"];

struct ParamsCell {
    n: usize,
    bits: u32,
    full_response: bool,
    alpha: f64,
    seed: u64,
}

fn run_params(
    args: &ExperimentArgs,
) -> Result<(Table, &'static [&'static str], &'static [&'static str])> {
    let sizes = args.sizes.clone().unwrap_or_else(|| vec![3, 10, 20]);
    let bits = args.bits_list(&[2, 4, 6, 8]);
    let seeds = args.seeds(10);

    let mut cells = Vec::new();
    for &n in &sizes {
        for &b in &bits {
            for full in [false, true] {
                for alpha in [0.0, 0.1] {
                    for seed in 0..seeds {
                        cells.push(ParamsCell {
                            n,
                            bits: b,
                            full_response: full,
                            alpha,
                            seed,
                        });
                    }
                }
            }
        }
    }

    let results = run_parallel(&cells, |cell| -> Result<Vec<String>> {
        let mat_seed = PARAMS_MAT_SEED_BASE + cell.seed;
        let a = marchenko_pastur(cell.n, args.ratio, mat_seed)?;
        let eig = jacobi_oracle(&a)?;
        let (lam, v) = eig.smallest();
        let opts = SolveOptions {
            bits: cell.bits,
            full_response_beta: if cell.full_response {
                Some(100.0)
            } else {
                None
            },
            bias_alpha: cell.alpha,
            stop: StopRule::OracleError,
            oracle: Some(OracleReference::new(lam).with_eigenvector(v.to_vec())),
            max_iterations: SUITE_MAX_ITERATIONS,
            sampler: args.sampler(cell.seed),
            ..Default::default()
        };
        let (res, converged) = solve_row(&a, &opts)?;
        let last = res.trace.last();
        Ok(vec![
            "params".into(),
            cell.n.to_string(),
            cell.bits.to_string(),
            if cell.full_response { "full" } else { "best" }.into(),
            cell.alpha.to_string(),
            mat_seed.to_string(),
            cell.seed.to_string(),
            converged.to_string(),
            res.iterations().to_string(),
            fmt_opt(res.final_guess_record().and_then(|r| r.eigenvector_error)),
            fmt_opt(last.and_then(|r| r.eigenvalue_error)),
            res.total_anneal_seconds().to_string(),
        ])
    });

    let mut raw = Table::new(&[
        "suite",
        "n",
        "bits",
        "response",
        "alpha",
        "mat_seed",
        "sampler_seed",
        "converged",
        "iterations",
        "guess_evec_err",
        "eval_err",
        "anneal_s",
    ]);
    for row in results {
        raw.push(row?);
    }
    Ok((raw, PARAMS_GROUP, PARAMS_METRICS))
}

// ---------------------------------------------------------------------------
// gap suite

pub const GAP_GROUP: &[&str] = &["suite", "n", "bits", "gap"];
pub const GAP_METRICS: &[&str] = &["iterations", "eval_err", "anneal_s"];

struct GapCell {
    bits: u32,
    gap: f64,
    seed: u64,
}

fn run_gap(
    args: &ExperimentArgs,
) -> Result<(Table, &'static [&'static str], &'static [&'static str])> {
    let bits = args.bits_list(&[2, 4]);
    let seeds = args.seeds(30);

    let mut cells = Vec::new();
    for &b in &bits {
        for &gap in &args.gaps {
            for seed in 0..seeds {
                cells.push(GapCell { bits: b, gap, seed });
            }
        }
    }

    let results = run_parallel(&cells, |cell| -> Result<Vec<String>> {
        let mat_seed = GAP_MAT_SEED_BASE + cell.seed;
        let a = gap_matrix(args.n, cell.gap, mat_seed)?;
        // the gap ensemble has smallest eigenvalue exactly 0 by construction
        let opts = SolveOptions {
            bits: cell.bits,
            stop: StopRule::OracleError,
            oracle: Some(OracleReference::new(0.0)),
            max_iterations: SUITE_MAX_ITERATIONS,
            sampler: args.sampler(cell.seed),
            ..Default::default()
        };
        let (res, converged) = solve_row(&a, &opts)?;
        let last = res.trace.last();
        Ok(vec![
            "gap".into(),
            args.n.to_string(),
            cell.bits.to_string(),
            cell.gap.to_string(),
            mat_seed.to_string(),
            cell.seed.to_string(),
            converged.to_string(),
            res.iterations().to_string(),
            fmt_opt(last.and_then(|r| r.eigenvalue_error)),
            res.total_anneal_seconds().to_string(),
        ])
    });

    let mut raw = Table::new(&[
        "suite",
        "n",
        "bits",
        "gap",
        "mat_seed",
        "sampler_seed",
        "converged",
        "iterations",
        "eval_err",
        "anneal_s",
    ]);
    for row in results {
        raw.push(row?);
    }
    Ok((raw, GAP_GROUP, GAP_METRICS))
}

// ---------------------------------------------------------------------------
// degenerate suite

pub const DEGENERATE_GROUP: &[&str] = &["suite", "n"];
pub const DEGENERATE_METRICS: &[&str] = &[
    "lambda1",
    "lambda2",
    "overlap",
    "iterations1",
    "iterations2",
];

fn run_degenerate(
    args: &ExperimentArgs,
) -> Result<(Table, &'static [&'static str], &'static [&'static str])> {
    let seeds = args.seeds(10);
    let cells: Vec<u64> = (0..seeds).collect();

    let results = run_parallel(&cells, |&seed| -> Result<Vec<String>> {
        let mat_seed = DEGENERATE_MAT_SEED_BASE + seed;
        let a = gap_matrix(args.n, 0.0, mat_seed)?;
        let opts1 = SolveOptions {
            sampler: args.sampler(seed),
            ..Default::default()
        };
        let (first, conv1) = solve_row(&a, &opts1)?;
        // lift the found direction so the second run lands on the orthogonal
        // partner in the degenerate eigenspace
        let alpha = a.trace() / args.n as f64 - first.eigenvalue;
        let deflated = deflate(&a, &first.eigenvector, alpha);
        let opts2 = SolveOptions {
            initial_lambda: InitialLambda::Explicit(first.eigenvalue + 1.0),
            sampler: args.sampler(seed + 500),
            ..Default::default()
        };
        let (second, conv2) = solve_row(&deflated, &opts2)?;
        let overlap = dot(&first.eigenvector, &second.eigenvector).abs();
        Ok(vec![
            "degenerate".into(),
            args.n.to_string(),
            mat_seed.to_string(),
            seed.to_string(),
            (conv1 && conv2).to_string(),
            first.eigenvalue.to_string(),
            second.eigenvalue.to_string(),
            overlap.to_string(),
            first.iterations().to_string(),
            second.iterations().to_string(),
        ])
    });

    let mut raw = Table::new(&[
        "suite",
        "n",
        "mat_seed",
        "sampler_seed",
        "converged",
        "lambda1",
        "lambda2",
        "overlap",
        "iterations1",
        "iterations2",
    ]);
    for row in results {
        raw.push(row?);
    }
    Ok((raw, DEGENERATE_GROUP, DEGENERATE_METRICS))
}

// ---------------------------------------------------------------------------
// bits-sweep suite

pub const BITS_SWEEP_GROUP: &[&str] = &["suite", "bits"];
pub const BITS_SWEEP_METRICS: &[&str] = &["iterations", "accepted", "anneal_s", "eval_err"];

struct BitsSweepCell {
    bits: u32,
    seed: u64,
}

fn run_bits_sweep(
    args: &ExperimentArgs,
) -> Result<(Table, &'static [&'static str], &'static [&'static str])> {
    let bits = args.bits_list(&[2, 4, 6, 8]);
    let seeds = args.seeds(5);
    let a = match &args.mtx {
        Some(path) => {
            load_matrix_market(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => marchenko_pastur(args.n, args.ratio, BITS_SWEEP_MAT_SEED)?,
    };
    let eig = jacobi_oracle(&a)?;
    let (lam, v_true) = eig.smallest();

    let mut cells = Vec::new();
    for &b in &bits {
        for seed in 0..seeds {
            cells.push(BitsSweepCell { bits: b, seed });
        }
    }

    let results = run_parallel(&cells, |cell| -> Result<(Vec<String>, PathBuf, String)> {
        let opts = SolveOptions {
            bits: cell.bits,
            stop: StopRule::OracleError,
            oracle: Some(OracleReference::new(lam).with_eigenvector(v_true.to_vec())),
            max_iterations: SUITE_MAX_ITERATIONS,
            sampler: args.sampler(cell.seed),
            ..Default::default()
        };
        let (res, converged) = solve_row(&a, &opts)?;
        let last = res.trace.last();
        let row = vec![
            "bits-sweep".into(),
            cell.bits.to_string(),
            cell.seed.to_string(),
            converged.to_string(),
            res.iterations().to_string(),
            res.accepted_steps().to_string(),
            res.total_anneal_seconds().to_string(),
            fmt_opt(last.and_then(|r| r.eigenvalue_error)),
        ];
        let trace_path = args
            .out
            .join(format!("trace_b{}_s{}.csv", cell.bits, cell.seed));
        Ok((row, trace_path, trace_csv(&res.trace)))
    });

    let mut raw = Table::new(&[
        "suite",
        "bits",
        "sampler_seed",
        "converged",
        "iterations",
        "accepted",
        "anneal_s",
        "eval_err",
    ]);
    for result in results {
        let (row, trace_path, trace) = result?;
        write_atomic(&trace_path, &trace)?;
        raw.push(row);
    }
    Ok((raw, BITS_SWEEP_GROUP, BITS_SWEEP_METRICS))
}

// ---------------------------------------------------------------------------

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<i32> {
    let (raw, group, metrics) = match args.suite {
        SuiteArg::Params => run_params(args)?,
        SuiteArg::Gap => run_gap(args)?,
        SuiteArg::Degenerate => run_degenerate(args)?,
        SuiteArg::BitsSweep => run_bits_sweep(args)?,
    };
    let suite_name = match args.suite {
        SuiteArg::Params => "params",
        SuiteArg::Gap => "gap",
        SuiteArg::Degenerate => "degenerate",
        SuiteArg::BitsSweep => "bits_sweep",
    };
    let (raw_path, summary_path) =
        write_suite_outputs(&args.out, suite_name, &raw, group, metrics)?;
    println!(
        "{suite_name}: {} rows -> {} and {}",
        raw.rows.len(),
        raw_path.display(),
        summary_path.display()
    );
    Ok(0)
}
