//! Extremal eigenpairs by minimizing the Rayleigh quotient through a
//! sequence of fixed-size QUBOs.
//!
//! A solve has two phases. The initial-guess phase fixes a shift `lambda`
//! (trace average by default), minimizes `x^t (A - lambda I) x` over the
//! discretized unit cube, updates `lambda` to the Rayleigh quotient of the
//! normalized minimizer, and repeats while the quotient decreases. The
//! descent phase then minimizes the second-order model
//! `2 v^t H delta + delta^t H delta` over a cube of shrinking scale
//! (`precision`), applies a line search with an enforced minimum step, and
//! accepts a candidate only when the quotient improves; a rejection shrinks
//! the cube. Rejections are how the scale adapts, so precision reaches any
//! requested tolerance while every QUBO keeps `n * bits` variables.
//!
//! The generalized problem `A v = lambda B v` substitutes `H = A - lambda B`
//! and generalized quotients; the spin variant samples `scale * {-1, +1}^n`
//! through an Ising model instead of a discretized cube.

pub mod jacobi;

use crate::annealer::{anneal, SamplerConfig, SECONDS_PER_WORK_UNIT};
use crate::encoding::{build_qubo, Encoding, IsingModel, QuadraticProgram};
use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, eigvec_distance, norm, normalized, SymMatrix};
use crate::rng::{derive_seed, Rng};

/// A candidate must beat the current quotient by this relative margin;
/// exact ties reject, which keeps machine-precision loops finite.
pub const TIE_REL_TOL: f64 = 1e-15;

/// Initial cube scale of the descent phase.
const INITIAL_PRECISION: f64 = 0.1;

/// In oracle-stop mode the cube scale may shrink below the tolerance; below
/// this floor further refinement is pointless in f64 and the solve fails.
const PRECISION_FLOOR: f64 = 1e-13;

/// Stream tag for the random generalized start vector.
const W0_STREAM: u64 = 0x57a7;

/// How the shift is initialized before the guess phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InitialLambda {
    /// tr(A) / n, the eigenvalue average.
    #[default]
    TraceAverage,
    /// Highest Gershgorin bound (upper bound on the largest eigenvalue).
    GershgorinUpper,
    Explicit(f64),
}

/// When the solve stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Descend until the cube scale reaches `tolerance` (the algorithm's own
    /// loop guard).
    #[default]
    Precision,
    /// Stop once `|lambda - oracle.eigenvalue| <= oracle.tolerance`; used by
    /// the experiment harness. Requires `SolveOptions::oracle`.
    OracleError,
}

/// Reference eigenpair used for error instrumentation and oracle stopping.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReference {
    pub eigenvalue: f64,
    pub eigenvector: Option<Vec<f64>>,
    pub tolerance: f64,
}

impl OracleReference {
    pub fn new(eigenvalue: f64) -> Self {
        OracleReference {
            eigenvalue,
            eigenvector: None,
            tolerance: 1e-8,
        }
    }

    pub fn with_eigenvector(mut self, v: Vec<f64>) -> Self {
        self.eigenvector = Some(v);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Bits per real variable in the fixed-point encoding.
    pub bits: u32,
    /// Target cube scale for the `Precision` stop rule.
    pub tolerance: f64,
    /// Bias strength toward the previous guess (guess phase only; 0 = off).
    pub bias_alpha: f64,
    /// Energy-weighted combination of the full response in the guess phase;
    /// `None` uses the best sample.
    pub full_response_beta: Option<f64>,
    /// Factor applied to the cube scale on a rejected step, in (0, 1).
    pub precision_shrink: f64,
    pub initial_lambda: InitialLambda,
    /// Hard cap on total iterations across both phases.
    pub max_iterations: usize,
    pub sampler: SamplerConfig,
    pub stop: StopRule,
    pub oracle: Option<OracleReference>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            bits: 4,
            tolerance: 1e-8,
            bias_alpha: 0.0,
            full_response_beta: None,
            precision_shrink: 0.1,
            initial_lambda: InitialLambda::TraceAverage,
            max_iterations: 10_000,
            sampler: SamplerConfig::default(),
            stop: StopRule::Precision,
            oracle: None,
        }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if self.bits < 1 {
            return Err(Error::InvalidOptions("bits must be >= 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidOptions("tolerance must be > 0".into()));
        }
        if !(self.precision_shrink > 0.0 && self.precision_shrink < 1.0) {
            return Err(Error::InvalidOptions(
                "precision_shrink must lie in (0, 1)".into(),
            ));
        }
        if self.bias_alpha.is_nan() || self.bias_alpha < 0.0 {
            return Err(Error::InvalidOptions("bias_alpha must be >= 0".into()));
        }
        if let Some(beta) = self.full_response_beta {
            if beta.is_nan() || beta < 0.0 {
                return Err(Error::InvalidOptions(
                    "full_response_beta must be >= 0".into(),
                ));
            }
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidOptions("max_iterations must be >= 1".into()));
        }
        if self.stop == StopRule::OracleError && self.oracle.is_none() {
            return Err(Error::InvalidOptions(
                "StopRule::OracleError needs SolveOptions::oracle".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Guess,
    Descent,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Guess => "guess",
            Phase::Descent => "descent",
        }
    }
}

/// State after one solver iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// 1-based, global across both phases.
    pub iteration: usize,
    pub phase: Phase,
    /// Current (best accepted) quotient after this iteration.
    pub lambda: f64,
    /// Cube scale used this iteration; the guess phase runs at 1.
    pub precision: f64,
    pub accepted: bool,
    /// |lambda - oracle eigenvalue|, when an oracle reference is set.
    pub eigenvalue_error: Option<f64>,
    /// Sign-adjusted distance to the oracle eigenvector, when provided.
    pub eigenvector_error: Option<f64>,
    /// |v^t delta| / ||delta|| after tangent projection (descent steps).
    pub ortho_error: Option<f64>,
    /// Cumulative modeled annealing seconds (deterministic work model).
    pub anneal_seconds: f64,
}

/// Converged eigenpair plus the per-iteration history.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalue: f64,
    /// Unit eigenvector (sign is arbitrary).
    pub eigenvector: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    /// False only on results carried inside `Error::ConvergenceFailure`.
    pub converged: bool,
}

impl EigenResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn accepted_steps(&self) -> usize {
        self.trace.iter().filter(|r| r.accepted).count()
    }

    pub fn total_anneal_seconds(&self) -> f64 {
        self.trace.last().map_or(0.0, |r| r.anneal_seconds)
    }

    pub fn guess_iterations(&self) -> usize {
        self.trace
            .iter()
            .filter(|r| r.phase == Phase::Guess)
            .count()
    }

    /// Last guess-phase record; its errors are the guess-phase exit errors.
    pub fn final_guess_record(&self) -> Option<&TraceRecord> {
        self.trace.iter().rev().find(|r| r.phase == Phase::Guess)
    }
}

/// Rayleigh quotient x^t A x / x^t x.
pub fn rayleigh(a: &SymMatrix, x: &[f64]) -> Result<f64> {
    let den = dot(x, x);
    if den == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(a.quadratic_form(x) / den)
}

/// Generalized Rayleigh quotient x^t A x / x^t B x (requires x^t B x > 0).
pub fn generalized_rayleigh(a: &SymMatrix, b: &SymMatrix, x: &[f64]) -> Result<f64> {
    let den = b.quadratic_form(x);
    if den.is_nan() || den <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            context: "denominator of the generalized Rayleigh quotient",
        });
    }
    Ok(a.quadratic_form(x) / den)
}

/// max_i (a_ii + sum_{j != i} |a_ij|), an upper bound on the largest
/// eigenvalue.
pub fn gershgorin_upper(a: &SymMatrix) -> f64 {
    let n = a.n();
    (0..n)
        .map(|i| {
            let row = a.row(i);
            let radius: f64 = row
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.abs())
                .sum();
            row[i] + radius
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Rank-one update A + alpha v1 v1^t that lifts the eigenvalue along `v1`
/// by `alpha` and leaves the spectrum on the orthogonal complement unchanged.
/// Callers supply a unit `v1` and `alpha > 0`.
pub fn deflate(a: &SymMatrix, v1: &[f64], alpha: f64) -> SymMatrix {
    a.add_rank_one(v1, alpha)
}

/// Line-search scaling for the descent step: the minimizer of
/// `(v + t delta)^t H (v + t delta)` when `delta^t H delta > 0`, floored at 1
/// so the candidate may overshoot (overshooting signals that the cube scale
/// is exhausted); 1 when the quadratic has no minimum.
pub fn line_search_tmin(h: &SymMatrix, v: &[f64], delta: &[f64]) -> f64 {
    let hd = h.matvec(delta);
    let dhd = dot(delta, &hd);
    // curvature below the round-off floor of the matvec is indistinguishable
    // from zero; dividing by it would produce an absurd overshoot
    let floor = 1e-12 * norm(delta) * norm(&hd);
    if dhd > floor {
        (-dot(v, &hd) / dhd).max(1.0)
    } else {
        1.0
    }
}

/// Computes the initial guess for the smallest eigenpair of `a`.
///
/// Returns the last improving `(v, lambda)` along with the per-iteration
/// trace (phase tag `guess`, precision 1).
pub fn initial_guess(
    a: &SymMatrix,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, f64, Vec<TraceRecord>)> {
    opts.validate()?;
    check_dim(a)?;
    let mut engine = Engine::new(a, None, false, opts, None);
    let (v, lambda) = engine.run_guess()?;
    Ok((v, lambda, engine.trace))
}

/// Runs the controlled-precision descent from a given unit vector `v` with
/// `lambda = rayleigh(a, v)`.
pub fn descend(a: &SymMatrix, v: &[f64], lambda: f64, opts: &SolveOptions) -> Result<EigenResult> {
    opts.validate()?;
    check_dim(a)?;
    if (norm(v) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidOptions(
            "descend needs a unit start vector".into(),
        ));
    }
    let q = rayleigh(a, v)?;
    if (q - lambda).abs() > 1e-10 * lambda.abs().max(1.0) {
        return Err(Error::InvalidOptions(
            "descend needs lambda = rayleigh(a, v)".into(),
        ));
    }
    let mut engine = Engine::new(a, None, false, opts, None);
    engine.run_descent(v.to_vec(), q)
}

/// Smallest eigenpair of `a`: initial guess followed by descent.
pub fn solve_smallest(a: &SymMatrix, opts: &SolveOptions) -> Result<EigenResult> {
    opts.validate()?;
    check_dim(a)?;
    Engine::new(a, None, false, opts, None).run()
}

/// Largest eigenpair via lambda_max(A) = -lambda_min(-A).
pub fn solve_largest(a: &SymMatrix, opts: &SolveOptions) -> Result<EigenResult> {
    opts.validate()?;
    check_dim(a)?;
    let neg = a.scaled(-1.0);
    let mut inner = opts.clone();
    if let InitialLambda::Explicit(x) = opts.initial_lambda {
        inner.initial_lambda = InitialLambda::Explicit(-x);
    }
    if let Some(oracle) = &mut inner.oracle {
        oracle.eigenvalue = -oracle.eigenvalue;
    }
    match Engine::new(&neg, None, false, &inner, None).run() {
        Ok(result) => Ok(negate_result(result)),
        Err(Error::ConvergenceFailure { iterations, best }) => Err(Error::ConvergenceFailure {
            iterations,
            best: Box::new(negate_result(*best)),
        }),
        Err(e) => Err(e),
    }
}

/// Smallest generalized eigenpair of `A v = lambda B v` for positive-definite
/// `B`. The shift is initialized from the generalized quotient of `w0` when
/// given, otherwise of a seeded random unit vector (an `Explicit` initial
/// lambda still takes precedence). Non-definiteness of `B` surfaces as an
/// error the first time a quotient denominator fails to be positive.
pub fn solve_generalized(
    a: &SymMatrix,
    b: &SymMatrix,
    opts: &SolveOptions,
    w0: Option<&[f64]>,
) -> Result<EigenResult> {
    opts.validate()?;
    check_dim(a)?;
    if b.n() != a.n() {
        return Err(Error::Dimension {
            context: "solve_generalized",
            expected: a.n(),
            got: b.n(),
        });
    }
    let w0 = match w0 {
        Some(w) => {
            if w.len() != a.n() {
                return Err(Error::Dimension {
                    context: "solve_generalized start vector",
                    expected: a.n(),
                    got: w.len(),
                });
            }
            Some(normalized(w)?)
        }
        None => None,
    };
    if b.n() <= jacobi::JACOBI_MAX_DIM {
        let b_eig = jacobi::jacobi_oracle(b)?;
        let d_max = b_eig.eigenvalues()[b.n() - 1];
        if d_max.is_nan() || d_max <= 0.0 || b_eig.eigenvalues()[0] <= 1e-12 * d_max {
            return Err(Error::NotPositiveDefinite {
                context: "B in solve_generalized",
            });
        }
    }
    Engine::new(a, Some(b), false, opts, w0).run()
}

/// Single-bit variant: each phase minimizes over `scale * {-1, +1}^n`
/// through an Ising model instead of a discretized cube. Spin vectors cannot
/// zero a coordinate, so steps are coarser and convergence relies on the
/// shrinking scale.
pub fn solve_smallest_ising(a: &SymMatrix, opts: &SolveOptions) -> Result<EigenResult> {
    opts.validate()?;
    check_dim(a)?;
    Engine::new(a, None, true, opts, None).run()
}

fn check_dim(a: &SymMatrix) -> Result<()> {
    if a.n() < 2 {
        return Err(Error::InvalidOptions(format!(
            "solver needs an n >= 2 matrix, got n = {}",
            a.n()
        )));
    }
    Ok(())
}

fn negate_result(mut r: EigenResult) -> EigenResult {
    r.eigenvalue = -r.eigenvalue;
    for row in &mut r.trace {
        row.lambda = -row.lambda;
    }
    r
}

/// One solve: sequential state machine over anneal calls.
struct Engine<'a> {
    a: &'a SymMatrix,
    metric: Option<&'a SymMatrix>,
    spin: bool,
    opts: &'a SolveOptions,
    w0: Option<Vec<f64>>,
    n: usize,
    calls: u64,
    work_units: u64,
    trace: Vec<TraceRecord>,
}

impl<'a> Engine<'a> {
    fn new(
        a: &'a SymMatrix,
        metric: Option<&'a SymMatrix>,
        spin: bool,
        opts: &'a SolveOptions,
        w0: Option<Vec<f64>>,
    ) -> Self {
        Engine {
            a,
            metric,
            spin,
            opts,
            w0,
            n: a.n(),
            calls: 0,
            work_units: 0,
            trace: Vec::new(),
        }
    }

    fn run(&mut self) -> Result<EigenResult> {
        let (v, lambda) = self.run_guess()?;
        self.run_descent(v, lambda)
    }

    fn quotient(&self, x: &[f64]) -> Result<f64> {
        match self.metric {
            None => rayleigh(self.a, x),
            Some(b) => generalized_rayleigh(self.a, b, x),
        }
    }

    /// H = A - lambda I, or A - lambda B in the generalized problem (the
    /// latter preserves the B-eigenspectrum).
    fn shifted(&self, lambda: f64) -> SymMatrix {
        match self.metric {
            None => self.a.shift_identity(lambda),
            Some(b) => self.a.sub_scaled(b, lambda),
        }
    }

    fn initial_lambda(&self) -> Result<f64> {
        if let InitialLambda::Explicit(x) = self.opts.initial_lambda {
            return Ok(x);
        }
        match self.metric {
            None => Ok(match self.opts.initial_lambda {
                InitialLambda::TraceAverage => self.a.trace() / self.n as f64,
                InitialLambda::GershgorinUpper => gershgorin_upper(self.a),
                InitialLambda::Explicit(x) => x,
            }),
            Some(_) => {
                // generalized: quotient of the given or a seeded random unit
                // vector, regardless of the trace/Gershgorin selector
                let w = match &self.w0 {
                    Some(w) => w.clone(),
                    None => {
                        let mut rng =
                            Rng::seed_from_u64(derive_seed(self.opts.sampler.seed, W0_STREAM));
                        rng.unit_vector(self.n)
                    }
                };
                self.quotient(&w)
            }
        }
    }

    /// Minimizes `r^t x + x^t H x` over the scaled discretized cube (or the
    /// scaled spin hypercube) and returns the decoded samples sorted by
    /// energy.
    fn solve_cube(&mut self, r: &[f64], h: &SymMatrix, scale: f64) -> Result<Vec<(f64, Vec<f64>)>> {
        let cfg = SamplerConfig {
            seed: derive_seed(self.opts.sampler.seed, self.calls),
            ..self.opts.sampler.clone()
        };
        self.calls += 1;
        if self.spin {
            let field: Vec<f64> = r.iter().map(|v| v * scale).collect();
            let couplings = h.scaled(scale * scale);
            let model = IsingModel::new(field, &couplings, 0.0)?;
            let set = anneal(&model, &cfg)?;
            self.work_units += set.stats().work_units;
            Ok(set
                .iter()
                .map(|s| {
                    let x = s
                        .bits
                        .iter()
                        .map(|b| if *b != 0 { scale } else { -scale })
                        .collect();
                    (s.energy, x)
                })
                .collect())
        } else {
            let qp = QuadraticProgram::new(r.to_vec(), h.clone())?;
            let enc = Encoding::new(self.opts.bits, scale)?;
            let model = build_qubo(&qp, &enc);
            let set = anneal(&model, &cfg)?;
            self.work_units += set.stats().work_units;
            set.iter()
                .map(|s| Ok((s.energy, enc.decode(&s.bits, self.n)?)))
                .collect()
        }
    }

    fn record(
        &mut self,
        phase: Phase,
        lambda: f64,
        v: &[f64],
        precision: f64,
        accepted: bool,
        ortho_error: Option<f64>,
    ) {
        let (eigenvalue_error, eigenvector_error) = match &self.opts.oracle {
            Some(o) => (
                Some((lambda - o.eigenvalue).abs()),
                o.eigenvector.as_ref().map(|t| eigvec_distance(v, t)),
            ),
            None => (None, None),
        };
        self.trace.push(TraceRecord {
            iteration: self.trace.len() + 1,
            phase,
            lambda,
            precision,
            accepted,
            eigenvalue_error,
            eigenvector_error,
            ortho_error,
            anneal_seconds: self.work_units as f64 * SECONDS_PER_WORK_UNIT,
        });
    }

    fn convergence_failure(&mut self, v: Vec<f64>, lambda: f64) -> Error {
        Error::ConvergenceFailure {
            iterations: self.trace.len(),
            best: Box::new(EigenResult {
                eigenvalue: lambda,
                eigenvector: v,
                trace: std::mem::take(&mut self.trace),
                converged: false,
            }),
        }
    }

    /// Iterative fixed-point guess: returns the last improving (v, lambda).
    fn run_guess(&mut self) -> Result<(Vec<f64>, f64)> {
        let lambda0 = self.initial_lambda()?;
        let mut lambda_ref = lambda0;
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut phase_iter = 0usize;

        loop {
            phase_iter += 1;
            let h = self.shifted(lambda_ref);
            // bias folds into the linear part: r = -alpha * previous guess
            let r: Vec<f64> = match (&best, self.opts.bias_alpha) {
                (Some((v, _)), alpha) if alpha > 0.0 => v.iter().map(|x| -alpha * x).collect(),
                _ => vec![0.0; self.n],
            };
            let decoded = self.solve_cube(&r, &h, 1.0)?;

            let raw = match self.opts.full_response_beta {
                Some(beta) => {
                    // x and -x are the same direction for the quotient, and
                    // with no bias the objective is even, so responses carry
                    // near-mirror pairs that would cancel out of the average;
                    // quotient out the sign gauge against the best sample
                    let reference = decoded[0].1.clone();
                    let aligned: Vec<(f64, Vec<f64>)> = decoded
                        .iter()
                        .map(|(e, x)| {
                            if dot(x, &reference) < 0.0 {
                                (*e, x.iter().map(|v| -v).collect())
                            } else {
                                (*e, x.clone())
                            }
                        })
                        .collect();
                    crate::annealer::weighted_combination(&aligned, beta)
                }
                None => decoded[0].1.clone(),
            };
            // a zero minimizer cannot be normalized; fall back to the best
            // nonzero sample (H close to PSD makes zero optimal)
            let raw = if norm(&raw) == 0.0 {
                decoded
                    .iter()
                    .map(|(_, x)| x)
                    .find(|x| norm(x) > 0.0)
                    .ok_or(Error::DegenerateSamples)?
                    .clone()
            } else {
                raw
            };
            let v = normalized(&raw)?;
            let q = self.quotient(&v)?;

            let improved = match &best {
                None => true,
                Some((_, bq)) => q < bq - TIE_REL_TOL * bq.abs(),
            };
            if improved {
                best = Some((v, q));
            }
            let (bv, bq) = best.as_ref().expect("set on first iteration");
            let (bv, bq) = (bv.clone(), *bq);
            self.record(Phase::Guess, bq, &bv, 1.0, improved, None);

            if self.trace.len() >= self.opts.max_iterations {
                return Err(self.convergence_failure(bv, bq));
            }

            // loop guard: continue while the quotient strictly decreases;
            // the first check gets one unconditional update iteration even
            // when the guess starts above the initial shift
            if q < lambda_ref - TIE_REL_TOL * lambda_ref.abs() || phase_iter == 1 {
                lambda_ref = q;
            } else {
                let (v, lambda) = best.expect("set on first iteration");
                return Ok((v, lambda));
            }
        }
    }

    fn stop_reached(&self, lambda: f64, precision: f64) -> bool {
        match self.opts.stop {
            StopRule::Precision => precision <= self.opts.tolerance,
            StopRule::OracleError => {
                let o = self.opts.oracle.as_ref().expect("validated");
                (lambda - o.eigenvalue).abs() <= o.tolerance
            }
        }
    }

    fn run_descent(&mut self, v0: Vec<f64>, lambda0: f64) -> Result<EigenResult> {
        let mut v = v0;
        let mut lambda = lambda0;
        let mut precision = INITIAL_PRECISION;

        loop {
            if self.stop_reached(lambda, precision) {
                break;
            }
            if self.opts.stop == StopRule::OracleError && precision < PRECISION_FLOOR {
                return Err(self.convergence_failure(v, lambda));
            }
            if self.trace.len() >= self.opts.max_iterations {
                return Err(self.convergence_failure(v, lambda));
            }

            let h = self.shifted(lambda);
            let hv = h.matvec(&v);
            let r: Vec<f64> = hv.iter().map(|x| 2.0 * x).collect();
            let decoded = self.solve_cube(&r, &h, precision)?;
            let delta_raw = decoded[0].1.clone();

            let mut accepted = false;
            let mut ortho_error = None;
            if norm(&delta_raw) > 0.0 {
                // tangent projection: delta <- delta - <v, delta> v
                let mut delta = delta_raw;
                let vd = dot(&v, &delta);
                axpy(&mut delta, -vd, &v);
                let dnorm = norm(&delta);
                if dnorm > 0.0 {
                    ortho_error = Some(dot(&v, &delta).abs() / dnorm);
                    let t_min = line_search_tmin(&h, &v, &delta);
                    let mut candidate = v.clone();
                    axpy(&mut candidate, t_min, &delta);
                    let q = self.quotient(&candidate)?;
                    if q < lambda - TIE_REL_TOL * lambda.abs() {
                        v = normalized(&candidate)?;
                        lambda = self.quotient(&v)?;
                        accepted = true;
                    }
                }
            }
            let precision_used = precision;
            if !accepted {
                precision *= self.opts.precision_shrink;
            }
            let v_snapshot = v.clone();
            self.record(
                Phase::Descent,
                lambda,
                &v_snapshot,
                precision_used,
                accepted,
                ortho_error,
            );
        }

        Ok(EigenResult {
            eigenvalue: lambda,
            eigenvector: v,
            trace: std::mem::take(&mut self.trace),
            converged: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annealer::SamplerMode;
    use crate::matgen::marchenko_pastur;

    fn exact_opts(bits: u32) -> SolveOptions {
        SolveOptions {
            bits,
            sampler: SamplerConfig {
                mode: SamplerMode::Exact,
                num_reads: 16,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn rayleigh_identity_is_one() {
        let a = SymMatrix::identity(3);
        assert_eq!(rayleigh(&a, &[0.3, -2.0, 1.5]).unwrap(), 1.0);
    }

    #[test]
    fn rayleigh_basis_vector_reads_diagonal() {
        let a = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(rayleigh(&a, &[1.0, 0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn rayleigh_off_diagonal_eigenvector() {
        let a = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(rayleigh(&a, &[1.0, -1.0]).unwrap(), -1.0);
    }

    #[test]
    fn rayleigh_rejects_zero() {
        let a = SymMatrix::identity(2);
        assert!(matches!(rayleigh(&a, &[0.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn generalized_rayleigh_reduces_to_standard() {
        let a = SymMatrix::diagonal(&[2.0, 5.0]);
        let b = SymMatrix::identity(2);
        let x = [0.6, 0.8];
        assert!(
            (generalized_rayleigh(&a, &b, &x).unwrap() - rayleigh(&a, &x).unwrap()).abs() < 1e-15
        );
    }

    #[test]
    fn generalized_rayleigh_proportional_pair() {
        let b = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let a = b.scaled(2.0);
        assert!((generalized_rayleigh(&a, &b, &[0.3, 0.9]).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_rayleigh_diagonal_pair() {
        let a = SymMatrix::diagonal(&[1.0, 4.0]);
        let b = SymMatrix::diagonal(&[1.0, 2.0]);
        assert_eq!(generalized_rayleigh(&a, &b, &[0.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn generalized_rayleigh_rejects_indefinite() {
        let a = SymMatrix::identity(2);
        let b = SymMatrix::diagonal(&[1.0, -3.0]);
        assert!(matches!(
            generalized_rayleigh(&a, &b, &[0.0, 1.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn gershgorin_examples() {
        assert_eq!(
            gershgorin_upper(&SymMatrix::diagonal(&[1.0, 2.0, 3.0])),
            3.0
        );
        let flip = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(gershgorin_upper(&flip), 1.0);
        let tri = SymMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        assert_eq!(gershgorin_upper(&tri), 3.0);
    }

    #[test]
    fn deflate_identity_along_basis_vector() {
        let a = SymMatrix::identity(3);
        let d = deflate(&a, &[1.0, 0.0, 0.0], 1.0);
        assert_eq!(d.get(0, 0), 2.0);
        assert_eq!(d.get(1, 1), 1.0);
        assert_eq!(d.get(2, 2), 1.0);
    }

    #[test]
    fn deflate_shifts_only_the_target_eigenvalue() {
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        let v1 = [s, -s]; // eigenvalue 1
        let d = deflate(&a, &v1, 0.7);
        let eig = jacobi::jacobi_oracle(&d).unwrap();
        assert!((eig.eigenvalues()[0] - 1.7).abs() < 1e-12);
        assert!((eig.eigenvalues()[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn initial_guess_finds_negative_direction() {
        let a = SymMatrix::diagonal(&[-1.0, 1.0]);
        let opts = exact_opts(2);
        let (v, lambda, trace) = initial_guess(&a, &opts).unwrap();
        assert!((lambda + 1.0).abs() < 1e-12);
        assert!(eigvec_distance(&v, &[1.0, 0.0]) < 1e-12);
        assert!(!trace.is_empty());
    }

    #[test]
    fn initial_guess_on_identity_exits_at_one() {
        let a = SymMatrix::identity(3);
        let opts = exact_opts(2);
        let (_, lambda, _) = initial_guess(&a, &opts).unwrap();
        assert!((lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn initial_guess_mp_error_is_small() {
        // guess-phase eigenvector error of order .1 on 10x10 MP matrices
        let mut worst = 0.0f64;
        for seed in 0..10u64 {
            let a = marchenko_pastur(10, 0.3, seed).unwrap();
            let eig = jacobi::jacobi_oracle(&a).unwrap();
            let opts = SolveOptions {
                bits: 4,
                sampler: SamplerConfig {
                    seed,
                    ..Default::default()
                },
                ..Default::default()
            };
            let (v, _, _) = initial_guess(&a, &opts).unwrap();
            worst = worst.max(eigvec_distance(&v, eig.smallest().1));
        }
        assert!(worst <= 0.35, "guess-phase error too large: {worst}");
    }

    #[test]
    fn descend_from_exact_eigenvector_only_shrinks() {
        let a = SymMatrix::diagonal(&[1.0, 2.0]);
        let opts = exact_opts(2);
        let res = descend(&a, &[1.0, 0.0], 1.0, &opts).unwrap();
        assert!(res.trace.iter().all(|r| !r.accepted));
        assert!((res.eigenvalue - 1.0).abs() < 1e-15);
        assert!(eigvec_distance(&res.eigenvector, &[1.0, 0.0]) < 1e-15);
        // precision shrank geometrically below the tolerance
        let last = res.trace.last().unwrap();
        assert!(last.precision <= 1e-7 * 1.0001);
    }

    #[test]
    fn descend_two_by_two_closed_form() {
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let opts = exact_opts(4);
        let res = descend(&a, &[1.0, 0.0], 2.0, &opts).unwrap();
        assert!((res.eigenvalue - 1.0).abs() <= 1e-8);
        let s = 1.0 / 2.0f64.sqrt();
        assert!(eigvec_distance(&res.eigenvector, &[s, -s]) <= 1e-6);
    }

    #[test]
    fn descend_validates_inputs() {
        let a = SymMatrix::diagonal(&[1.0, 2.0]);
        let opts = exact_opts(2);
        assert!(descend(&a, &[2.0, 0.0], 1.0, &opts).is_err());
        assert!(descend(&a, &[1.0, 0.0], 1.5, &opts).is_err());
    }

    #[test]
    fn solve_rejects_one_by_one() {
        let a = SymMatrix::diagonal(&[5.0]);
        assert!(matches!(
            solve_smallest(&a, &SolveOptions::default()),
            Err(Error::InvalidOptions(_))
        ));
    }

    #[test]
    fn solve_smallest_diagonal() {
        let a = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let res = solve_smallest(&a, &SolveOptions::default()).unwrap();
        assert!((res.eigenvalue - 1.0).abs() <= 1e-8);
        assert!(eigvec_distance(&res.eigenvector, &[1.0, 0.0, 0.0]) <= 1e-6);
        assert!((norm(&res.eigenvector) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn solve_largest_diagonal_and_flip() {
        let a = SymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let res = solve_largest(&a, &SolveOptions::default()).unwrap();
        assert!((res.eigenvalue - 3.0).abs() <= 1e-8);
        assert!(eigvec_distance(&res.eigenvector, &[0.0, 0.0, 1.0]) <= 1e-6);

        let flip = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let res = solve_largest(&flip, &SolveOptions::default()).unwrap();
        assert!((res.eigenvalue - 1.0).abs() <= 1e-8);
        let s = 1.0 / 2.0f64.sqrt();
        assert!(eigvec_distance(&res.eigenvector, &[s, s]) <= 1e-6);
    }

    #[test]
    fn accepted_lambda_sequence_is_strictly_decreasing() {
        let a = marchenko_pastur(8, 0.3, 3).unwrap();
        let res = solve_smallest(&a, &SolveOptions::default()).unwrap();
        let accepted: Vec<f64> = res
            .trace
            .iter()
            .filter(|r| r.accepted)
            .map(|r| r.lambda)
            .collect();
        for w in accepted.windows(2) {
            assert!(w[1] < w[0], "lambda did not strictly decrease: {w:?}");
        }
    }

    #[test]
    fn orthogonality_invariant_along_descent() {
        let a = marchenko_pastur(8, 0.3, 5).unwrap();
        let res = solve_smallest(&a, &SolveOptions::default()).unwrap();
        for row in res.trace.iter().filter(|r| r.phase == Phase::Descent) {
            if let Some(err) = row.ortho_error {
                assert!(err <= 1e-12, "projection left v^t delta = {err}");
            }
        }
    }

    #[test]
    fn solve_generalized_identity_metric_matches_standard() {
        let a = marchenko_pastur(6, 0.5, 9).unwrap();
        let b = SymMatrix::identity(6);
        let opts = SolveOptions::default();
        let std = solve_smallest(&a, &opts).unwrap();
        let gen = solve_generalized(&a, &b, &opts, None).unwrap();
        assert!((std.eigenvalue - gen.eigenvalue).abs() <= 1e-7);
    }

    #[test]
    fn solve_generalized_decoupled_ratios() {
        let a = SymMatrix::diagonal(&[2.0, 6.0]);
        let b = SymMatrix::diagonal(&[1.0, 2.0]);
        let res = solve_generalized(&a, &b, &SolveOptions::default(), None).unwrap();
        assert!((res.eigenvalue - 2.0).abs() <= 1e-8);
        assert!(eigvec_distance(&res.eigenvector, &[1.0, 0.0]) <= 1e-6);
    }

    #[test]
    fn solve_generalized_rejects_indefinite_b() {
        let a = SymMatrix::identity(2);
        let b = SymMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            solve_generalized(&a, &b, &SolveOptions::default(), None),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn ising_variant_exact_spin_direction() {
        let a = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let res = solve_smallest_ising(&a, &SolveOptions::default()).unwrap();
        assert!((res.eigenvalue + 1.0).abs() <= 1e-8);
        let s = 1.0 / 2.0f64.sqrt();
        assert!(eigvec_distance(&res.eigenvector, &[s, -s]) <= 1e-6);
    }

    #[test]
    fn ising_variant_converges_off_spin_directions() {
        // eigenvector e_1 has a zero coordinate no spin vector can express;
        // shrinking additive steps still converge
        let a = SymMatrix::diagonal(&[1.0, 2.0]);
        let res = solve_smallest_ising(&a, &SolveOptions::default()).unwrap();
        assert!((res.eigenvalue - 1.0).abs() <= 1e-8);
        let av = a.matvec(&res.eigenvector);
        let resid: f64 = av
            .iter()
            .zip(&res.eigenvector)
            .map(|(x, y)| (x - res.eigenvalue * y) * (x - res.eigenvalue * y))
            .sum::<f64>()
            .sqrt();
        assert!(resid <= 1e-6);
    }

    #[test]
    fn oracle_stop_rule_requires_reference() {
        let a = SymMatrix::diagonal(&[1.0, 2.0]);
        let opts = SolveOptions {
            stop: StopRule::OracleError,
            ..Default::default()
        };
        assert!(matches!(
            solve_smallest(&a, &opts),
            Err(Error::InvalidOptions(_))
        ));
    }

    #[test]
    fn oracle_stop_rule_halts_on_eigenvalue_error() {
        let a = SymMatrix::diagonal(&[1.0, 2.0, 4.0]);
        let opts = SolveOptions {
            stop: StopRule::OracleError,
            oracle: Some(OracleReference::new(1.0)),
            ..Default::default()
        };
        let res = solve_smallest(&a, &opts).unwrap();
        assert!((res.eigenvalue - 1.0).abs() <= 1e-8);
        assert!(res.trace.last().unwrap().eigenvalue_error.unwrap() <= 1e-8);
    }

    #[test]
    fn max_iterations_carries_best_so_far() {
        let a = marchenko_pastur(6, 0.3, 1).unwrap();
        let opts = SolveOptions {
            max_iterations: 3,
            ..Default::default()
        };
        match solve_smallest(&a, &opts) {
            Err(Error::ConvergenceFailure { iterations, best }) => {
                assert_eq!(iterations, 3);
                assert!(!best.converged);
                assert_eq!(best.trace.len(), 3);
                assert!((norm(&best.eigenvector) - 1.0).abs() < 1e-12);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn trace_has_monotone_iteration_index_and_anneal_time() {
        let a = marchenko_pastur(6, 0.3, 2).unwrap();
        let res = solve_smallest(&a, &SolveOptions::default()).unwrap();
        for (k, row) in res.trace.iter().enumerate() {
            assert_eq!(row.iteration, k + 1);
        }
        for w in res.trace.windows(2) {
            assert!(w[1].anneal_seconds >= w[0].anneal_seconds);
        }
        assert!(res.total_anneal_seconds() > 0.0);
    }
}
