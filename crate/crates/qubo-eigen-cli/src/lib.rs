//! Command-line front end: single solves with machine-readable convergence
//! traces, and the experiment suites behind the parameter/gap/degeneracy
//! studies.

pub mod experiments;
pub mod output;

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qubo_eigen::eigensolver::{
    jacobi::{generalized_jacobi_oracle, jacobi_oracle, JACOBI_MAX_DIM},
    EigenResult, InitialLambda, OracleReference, SolveOptions, StopRule,
};
use qubo_eigen::matgen::{load_matrix_market, EnsembleKind, EnsembleSpec};
use qubo_eigen::matrix::SymMatrix;
use qubo_eigen::{
    solve_generalized, solve_largest, solve_smallest, solve_smallest_ising, Error, SamplerConfig,
};

use output::{fmt_opt, trace_csv, write_atomic, write_json};

#[derive(Parser, Debug)]
#[command(
    name = "qubo-eigen",
    about = "Extremal eigenpairs of symmetric matrices via annealed QUBO descent",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the smallest (or largest) eigenpair of a symmetric matrix.
    Solve(SolveArgs),
    /// Solve the generalized problem A v = lambda B v (B positive definite).
    SolveGen(SolveGenArgs),
    /// Run an experiment suite; emits raw rows and per-cell summary CSVs.
    Experiment(experiments::ExperimentArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    /// Marchenko-Pastur (Wishart) matrix with the --ratio parameter.
    Mp,
    /// Haar-conjugated Diag(0, gap, 1, ..., n-2).
    Gap,
    /// Gap ensemble at gap 0 (degenerate bottom eigenvalue).
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StopArg {
    /// Stop when the cube scale reaches --tolerance.
    Precision,
    /// Stop when |lambda - lambda_oracle| <= 1e-8 (needs the classical
    /// oracle, so n <= 2000).
    Oracle,
}

/// --init accepts `trace`, `gershgorin`, or an explicit float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitArg(pub InitialLambda);

impl FromStr for InitArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "trace" => Ok(InitArg(InitialLambda::TraceAverage)),
            "gershgorin" => Ok(InitArg(InitialLambda::GershgorinUpper)),
            other => other
                .parse::<f64>()
                .map(|v| InitArg(InitialLambda::Explicit(v)))
                .map_err(|_| format!("expected 'trace', 'gershgorin' or a float, got '{other}'")),
        }
    }
}

/// Solver flags shared by `solve` and `solve-gen`.
#[derive(Args, Debug, Clone)]
pub struct OptArgs {
    /// Bits per real variable in the fixed-point encoding.
    #[arg(long, default_value_t = 4)]
    pub bits: u32,
    /// Target cube scale for --stop precision.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Bias strength toward the previous guess (guess phase only).
    #[arg(long, default_value_t = 0.0)]
    pub bias_alpha: f64,
    /// Combine the full sampler response with this beta in the guess phase.
    #[arg(long)]
    pub full_response_beta: Option<f64>,
    /// Cube-scale factor applied on a rejected step.
    #[arg(long, default_value_t = 0.1)]
    pub precision_shrink: f64,
    /// Initial shift: trace | gershgorin | `<float>`.
    #[arg(long, default_value = "trace")]
    pub init: InitArg,
    /// Seed for the sampler and for generated ensembles.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Metropolis sweeps per read.
    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,
    /// Independent annealer restarts per QUBO.
    #[arg(long, default_value_t = 32)]
    pub reads: usize,
    /// Stop rule.
    #[arg(long, value_enum, default_value_t = StopArg::Precision)]
    pub stop: StopArg,
    /// Output directory for trace.csv and summary.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl OptArgs {
    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            bits: self.bits,
            tolerance: self.tolerance,
            bias_alpha: self.bias_alpha,
            full_response_beta: self.full_response_beta,
            precision_shrink: self.precision_shrink,
            initial_lambda: self.init.0,
            sampler: SamplerConfig {
                num_reads: self.reads,
                sweeps: self.sweeps,
                seed: self.seed,
                ..Default::default()
            },
            ..Default::default()
        }
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).multiple(false)))]
pub struct SolveArgs {
    /// Matrix Market file with the symmetric matrix.
    #[arg(long, value_name = "FILE", group = "source")]
    pub mtx: Option<PathBuf>,
    /// Diagonal matrix given as comma-separated entries.
    #[arg(
        long,
        value_delimiter = ',',
        value_name = "D1,D2,...",
        group = "source"
    )]
    pub diag: Option<Vec<f64>>,
    /// Generated ensemble (seeded by --seed).
    #[arg(long, value_enum, group = "source")]
    pub ensemble: Option<EnsembleArg>,
    /// Dimension for generated ensembles.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Marchenko-Pastur aspect ratio.
    #[arg(long, default_value_t = 0.3)]
    pub ratio: f64,
    /// Bottom spectral gap for the gap ensemble.
    #[arg(long, default_value_t = 0.1)]
    pub gap: f64,
    /// Use the single-bit Ising variant instead of the QUBO encoding.
    #[arg(long, conflicts_with = "largest")]
    pub ising: bool,
    /// Compute the largest eigenpair instead of the smallest.
    #[arg(long)]
    pub largest: bool,
    #[command(flatten)]
    pub opts: OptArgs,
}

#[derive(Args, Debug)]
pub struct SolveGenArgs {
    /// Matrix Market file with A.
    #[arg(long = "a", value_name = "FILE")]
    pub a: PathBuf,
    /// Matrix Market file with B (must be positive definite).
    #[arg(long = "b", value_name = "FILE")]
    pub b: PathBuf,
    /// Optional start vector (whitespace-separated floats in a text file).
    #[arg(long, value_name = "FILE")]
    pub w0: Option<PathBuf>,
    #[command(flatten)]
    pub opts: OptArgs,
}

#[derive(Serialize)]
struct SolveSummary {
    command: String,
    matrix: MatrixInfo,
    options: OptionsEcho,
    result: ResultInfo,
}

#[derive(Serialize)]
struct MatrixInfo {
    source: String,
    n: usize,
}

#[derive(Serialize)]
struct OptionsEcho {
    bits: u32,
    tolerance: f64,
    bias_alpha: f64,
    full_response_beta: Option<f64>,
    precision_shrink: f64,
    init: String,
    seed: u64,
    sweeps: usize,
    reads: usize,
    stop: String,
    ising: bool,
    largest: bool,
}

#[derive(Serialize)]
struct ResultInfo {
    converged: bool,
    eigenvalue: f64,
    iterations: usize,
    accepted_steps: usize,
    guess_iterations: usize,
    anneal_seconds: f64,
    /// Wall-clock; not reproducible run to run, unlike anneal_seconds.
    wall_seconds: f64,
    residual: f64,
    eigenvalue_error: Option<f64>,
    eigenvector_error: Option<f64>,
    eigenvector: Vec<f64>,
}

fn echo_options(opts: &OptArgs, ising: bool, largest: bool) -> OptionsEcho {
    OptionsEcho {
        bits: opts.bits,
        tolerance: opts.tolerance,
        bias_alpha: opts.bias_alpha,
        full_response_beta: opts.full_response_beta,
        precision_shrink: opts.precision_shrink,
        init: match opts.init.0 {
            InitialLambda::TraceAverage => "trace".into(),
            InitialLambda::GershgorinUpper => "gershgorin".into(),
            InitialLambda::Explicit(v) => v.to_string(),
        },
        seed: opts.seed,
        sweeps: opts.sweeps,
        reads: opts.reads,
        stop: match opts.stop {
            StopArg::Precision => "precision".into(),
            StopArg::Oracle => "oracle".into(),
        },
        ising,
        largest,
    }
}

fn build_matrix(args: &SolveArgs) -> Result<(SymMatrix, String)> {
    if let Some(path) = &args.mtx {
        let m = load_matrix_market(path).with_context(|| format!("loading {}", path.display()))?;
        return Ok((m, format!("mtx({})", path.display())));
    }
    if let Some(diag) = &args.diag {
        return Ok((SymMatrix::diagonal(diag), format!("diag({diag:?})")));
    }
    let kind = match args.ensemble.expect("clap guarantees a source") {
        EnsembleArg::Mp => EnsembleKind::MarchenkoPastur { ratio: args.ratio },
        EnsembleArg::Gap => EnsembleKind::GapSpectrum { gap: args.gap },
        EnsembleArg::Degenerate => EnsembleKind::Degenerate,
    };
    let spec = EnsembleSpec {
        kind,
        n: args.n,
        seed: args.opts.seed,
    };
    let label = format!("{}[n={},seed={}]", spec.label(), spec.n, spec.seed);
    Ok((spec.build()?, label))
}

/// Attaches the classical reference (for error columns, and required by
/// --stop oracle) when the matrix is small enough for the oracle.
fn attach_oracle(
    opts: &mut SolveOptions,
    stop: StopArg,
    reference: Option<OracleReference>,
) -> Result<()> {
    opts.oracle = reference;
    if stop == StopArg::Oracle {
        if opts.oracle.is_none() {
            bail!("--stop oracle needs the classical oracle, which is limited to n <= {JACOBI_MAX_DIM}");
        }
        opts.stop = StopRule::OracleError;
    }
    Ok(())
}

fn residual_norm(a: &SymMatrix, b: Option<&SymMatrix>, res: &EigenResult) -> f64 {
    let av = a.matvec(&res.eigenvector);
    let bv = match b {
        Some(b) => b.matvec(&res.eigenvector),
        None => res.eigenvector.clone(),
    };
    av.iter()
        .zip(&bv)
        .map(|(x, y)| (x - res.eigenvalue * y) * (x - res.eigenvalue * y))
        .sum::<f64>()
        .sqrt()
}

fn unpack_solve(outcome: qubo_eigen::Result<EigenResult>) -> Result<EigenResult> {
    match outcome {
        Ok(res) => Ok(res),
        Err(Error::ConvergenceFailure { best, .. }) => Ok(*best),
        Err(e) => Err(e.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn write_solve_outputs(
    command: &str,
    matrix: MatrixInfo,
    options: OptionsEcho,
    a: &SymMatrix,
    b: Option<&SymMatrix>,
    res: &EigenResult,
    wall_seconds: f64,
    out_dir: &PathBuf,
) -> Result<()> {
    let trace_path = out_dir.join("trace.csv");
    write_atomic(&trace_path, &trace_csv(&res.trace))?;

    let last = res.trace.last();
    let summary = SolveSummary {
        command: command.into(),
        matrix,
        options,
        result: ResultInfo {
            converged: res.converged,
            eigenvalue: res.eigenvalue,
            iterations: res.iterations(),
            accepted_steps: res.accepted_steps(),
            guess_iterations: res.guess_iterations(),
            anneal_seconds: res.total_anneal_seconds(),
            wall_seconds,
            residual: residual_norm(a, b, res),
            eigenvalue_error: last.and_then(|r| r.eigenvalue_error),
            eigenvector_error: last.and_then(|r| r.eigenvector_error),
            eigenvector: res.eigenvector.clone(),
        },
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let (a, source) = build_matrix(args)?;
    let mut opts = args.opts.solve_options();

    let reference = if a.n() <= JACOBI_MAX_DIM {
        let eig = jacobi_oracle(&a)?;
        let (lam, v) = if args.largest {
            eig.largest()
        } else {
            eig.smallest()
        };
        Some(OracleReference::new(lam).with_eigenvector(v.to_vec()))
    } else {
        None
    };
    attach_oracle(&mut opts, args.opts.stop, reference)?;

    let start = Instant::now();
    let outcome = if args.ising {
        solve_smallest_ising(&a, &opts)
    } else if args.largest {
        solve_largest(&a, &opts)
    } else {
        solve_smallest(&a, &opts)
    };
    let wall = start.elapsed().as_secs_f64();
    let res = unpack_solve(outcome)?;

    write_solve_outputs(
        "solve",
        MatrixInfo { source, n: a.n() },
        echo_options(&args.opts, args.ising, args.largest),
        &a,
        None,
        &res,
        wall,
        &args.opts.out,
    )?;

    println!(
        "{} eigenvalue {:.12e} in {} iterations ({} accepted), anneal {:.3}s, wall {:.3}s{}",
        if args.largest { "largest" } else { "smallest" },
        res.eigenvalue,
        res.iterations(),
        res.accepted_steps(),
        res.total_anneal_seconds(),
        wall,
        if res.converged {
            ""
        } else {
            " [NOT CONVERGED]"
        },
    );
    if let Some(err) = res.trace.last().and_then(|r| r.eigenvalue_error) {
        println!("eigenvalue error vs oracle: {}", fmt_opt(Some(err)));
    }
    Ok(if res.converged { 0 } else { 1 })
}

fn read_vector_file(path: &PathBuf) -> Result<Vec<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| anyhow!("bad float '{t}' in {}", path.display()))
        })
        .collect()
}

pub fn cmd_solve_gen(args: &SolveGenArgs) -> Result<i32> {
    let a = load_matrix_market(&args.a).with_context(|| format!("loading {}", args.a.display()))?;
    let b = load_matrix_market(&args.b)
        .with_context(|| format!("loading B matrix {}", args.b.display()))?;
    let w0 = args.w0.as_ref().map(read_vector_file).transpose()?;
    let mut opts = args.opts.solve_options();

    let reference = if a.n() <= JACOBI_MAX_DIM {
        let eig = generalized_jacobi_oracle(&a, &b).map_err(|e| match e {
            Error::NotPositiveDefinite { .. } => {
                anyhow!("B matrix {} is not positive definite", args.b.display())
            }
            other => other.into(),
        })?;
        Some(
            OracleReference::new(eig.eigenvalues()[0])
                .with_eigenvector(eig.eigenvector(0).to_vec()),
        )
    } else {
        None
    };
    attach_oracle(&mut opts, args.opts.stop, reference)?;

    let start = Instant::now();
    let outcome = solve_generalized(&a, &b, &opts, w0.as_deref());
    let wall = start.elapsed().as_secs_f64();
    let res = unpack_solve(outcome)?;

    let source = format!("gen({}, {})", args.a.display(), args.b.display());
    write_solve_outputs(
        "solve-gen",
        MatrixInfo { source, n: a.n() },
        echo_options(&args.opts, false, false),
        &a,
        Some(&b),
        &res,
        wall,
        &args.opts.out,
    )?;

    println!(
        "generalized eigenvalue {:.12e} in {} iterations, residual |Av - lBv| = {:.3e}{}",
        res.eigenvalue,
        res.iterations(),
        residual_norm(&a, Some(&b), &res),
        if res.converged {
            ""
        } else {
            " [NOT CONVERGED]"
        },
    );
    Ok(if res.converged { 0 } else { 1 })
}

pub fn run(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::SolveGen(args) => cmd_solve_gen(args),
        Command::Experiment(args) => experiments::cmd_experiment(args),
    }
}
