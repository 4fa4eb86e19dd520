//! Low-energy sampling of QUBO / Ising models.
//!
//! `anneal` runs seeded single-bit-flip Metropolis sweeps under a geometric
//! inverse-temperature schedule; the response holds each read's final state
//! plus the best state visited anywhere, so its minimum is the best energy
//! seen while the rest of the set carries the read-to-read scatter.
//! `brute_force` enumerates every assignment (Gray-code walk) and serves as
//! the ideal-annealer oracle for small models. Both are deterministic for a
//! fixed `(model, config)` pair.

use crate::encoding::{Encoding, IsingModel, QuboModel};
use crate::error::{Error, Result};
use crate::matrix::axpy;
use crate::rng::Rng;

/// Enumeration guard for `brute_force`.
pub const BRUTE_FORCE_MAX_VARS: usize = 24;

/// Nominal seconds per work unit used for the deterministic anneal-time
/// accounting (one unit is roughly one proposal or one coefficient touch).
/// Wall-clock time is not reproducible run to run, so traces carry this
/// modeled time instead.
pub const SECONDS_PER_WORK_UNIT: f64 = 1e-9;

/// How the solver obtains samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerMode {
    /// Simulated annealing (the normal backend).
    #[default]
    Annealer,
    /// Exhaustive enumeration; exact but limited to small models.
    Exact,
}

/// Sampler settings. Reads are independent restarts; read `k` is seeded with
/// `seed + k` so the set of returned samples does not depend on scheduling.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub num_reads: usize,
    pub sweeps: usize,
    /// Explicit (beta_min, beta_max); `None` derives a range from the
    /// coefficient magnitudes of the model being sampled.
    pub beta_schedule: Option<(f64, f64)>,
    pub seed: u64,
    pub mode: SamplerMode,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            num_reads: 32,
            sweeps: 1000,
            beta_schedule: None,
            seed: 0,
            mode: SamplerMode::Annealer,
        }
    }
}

impl SamplerConfig {
    fn validate(&self) -> Result<()> {
        if self.num_reads < 1 || self.sweeps < 1 {
            return Err(Error::InvalidOptions(
                "sampler needs num_reads >= 1 and sweeps >= 1".into(),
            ));
        }
        if let Some((lo, hi)) = self.beta_schedule {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::InvalidOptions(format!(
                    "beta schedule must satisfy 0 < beta_min < beta_max, got ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

/// One sampled state and its exact energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Binary state; for spin models a set bit means spin +1.
    pub bits: Vec<u8>,
    pub energy: f64,
}

/// Deterministic accounting of sampler effort.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnnealStats {
    pub proposals: u64,
    pub accepted_flips: u64,
    pub work_units: u64,
}

impl AnnealStats {
    pub fn modeled_seconds(&self) -> f64 {
        self.work_units as f64 * SECONDS_PER_WORK_UNIT
    }
}

/// Energy-sorted, deduplicated samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    samples: Vec<Sample>,
    stats: AnnealStats,
}

impl SampleSet {
    fn from_raw(mut samples: Vec<Sample>, stats: AnnealStats) -> Self {
        samples.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.bits.cmp(&b.bits))
        });
        samples.dedup_by(|a, b| a.bits == b.bits);
        SampleSet { samples, stats }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Lowest-energy sample.
    pub fn best(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn stats(&self) -> AnnealStats {
        self.stats
    }
}

impl<'a> IntoIterator for &'a SampleSet {
    type Item = &'a Sample;
    type IntoIter = std::slice::Iter<'a, Sample>;
    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

/// Common sampling interface over `QuboModel` and `IsingModel`.
///
/// States are byte vectors of 0/1 flags; spin models interpret a set bit as
/// spin +1. The field/delta methods are the incremental Metropolis kernel:
/// `local_fields` is O(m^2), a rejected proposal is O(1) and an accepted
/// flip is O(m).
pub trait BinaryModel {
    fn num_vars(&self) -> usize;
    /// Exact energy of a state, offset included.
    fn energy(&self, bits: &[u8]) -> f64;
    fn local_fields(&self, bits: &[u8]) -> Vec<f64>;
    fn flip_delta(&self, bits: &[u8], fields: &[f64], k: usize) -> f64;
    fn apply_flip(&self, bits: &mut [u8], fields: &mut [f64], k: usize);
    /// (max |coeff|, min nonzero |coeff|) — drives the auto beta range.
    fn coeff_extremes(&self) -> (f64, f64);
}

impl BinaryModel for QuboModel {
    fn num_vars(&self) -> usize {
        self.num_vars()
    }

    fn energy(&self, bits: &[u8]) -> f64 {
        QuboModel::energy(self, bits)
    }

    fn local_fields(&self, bits: &[u8]) -> Vec<f64> {
        let m = self.num_vars();
        let mut g = vec![0.0; m];
        for (j, bit) in bits.iter().enumerate() {
            if *bit != 0 {
                axpy(&mut g, 1.0, self.row(j));
            }
        }
        g
    }

    #[inline]
    fn flip_delta(&self, bits: &[u8], fields: &[f64], k: usize) -> f64 {
        let ckk = self.coeff(k, k);
        if bits[k] == 0 {
            ckk + 2.0 * fields[k]
        } else {
            ckk - 2.0 * fields[k]
        }
    }

    #[inline]
    fn apply_flip(&self, bits: &mut [u8], fields: &mut [f64], k: usize) {
        let d = if bits[k] == 0 { 1.0 } else { -1.0 };
        bits[k] ^= 1;
        axpy(fields, d, self.row(k));
    }

    fn coeff_extremes(&self) -> (f64, f64) {
        coeff_extremes(self.row(0).len(), |i, j| self.coeff(i, j), None)
    }
}

impl BinaryModel for IsingModel {
    fn num_vars(&self) -> usize {
        self.num_vars()
    }

    fn energy(&self, bits: &[u8]) -> f64 {
        self.energy_bits(bits)
    }

    fn local_fields(&self, bits: &[u8]) -> Vec<f64> {
        let m = self.num_vars();
        let mut g = vec![0.0; m];
        for (j, bit) in bits.iter().enumerate() {
            let s = if *bit != 0 { 1.0 } else { -1.0 };
            axpy(&mut g, s, self.coupling_row(j));
        }
        g
    }

    #[inline]
    fn flip_delta(&self, bits: &[u8], fields: &[f64], k: usize) -> f64 {
        let s = if bits[k] != 0 { 1.0 } else { -1.0 };
        -2.0 * s * (self.field()[k] + 2.0 * fields[k])
    }

    #[inline]
    fn apply_flip(&self, bits: &mut [u8], fields: &mut [f64], k: usize) {
        let s_old = if bits[k] != 0 { 1.0 } else { -1.0 };
        bits[k] ^= 1;
        axpy(fields, -2.0 * s_old, self.coupling_row(k));
    }

    fn coeff_extremes(&self) -> (f64, f64) {
        coeff_extremes(
            self.num_vars(),
            |i, j| self.coupling(i, j),
            Some(self.field()),
        )
    }
}

fn coeff_extremes(
    m: usize,
    coeff: impl Fn(usize, usize) -> f64,
    linear: Option<&[f64]>,
) -> (f64, f64) {
    let mut max_abs = 0.0f64;
    let mut min_nonzero = f64::INFINITY;
    let mut visit = |v: f64| {
        let a = v.abs();
        if a > 0.0 {
            max_abs = max_abs.max(a);
            min_nonzero = min_nonzero.min(a);
        }
    };
    for i in 0..m {
        for j in i..m {
            visit(coeff(i, j));
        }
    }
    if let Some(h) = linear {
        for v in h {
            visit(*v);
        }
    }
    (max_abs, min_nonzero)
}

/// Geometric schedule endpoints derived from the coefficient magnitudes:
/// beta_min = ln 2 / max|coeff| (roughly 50% uphill acceptance at the start),
/// beta_max = ln(100 m) / min nonzero |coeff| (near-greedy at the end).
///
/// The endpoints follow the coefficient scale without a fixed absolute clamp:
/// descent-phase models shrink with the cube scale, and any absolute cap on
/// beta would make the sampler non-selective precisely when high accuracy is
/// needed. Only overflow and degenerate (all-zero) models are guarded.
fn auto_beta_range<M: BinaryModel>(model: &M) -> (f64, f64) {
    let m = model.num_vars();
    let (max_abs, min_nonzero) = model.coeff_extremes();
    if max_abs == 0.0 {
        // constant energy surface; any schedule samples uniformly
        return (1.0, 10.0);
    }
    let mut beta_min = (std::f64::consts::LN_2 / max_abs).clamp(1e-30, 1e300);
    let mut beta_max = ((100.0 * m as f64).ln() / min_nonzero).clamp(1e-30, 1e300);
    if beta_min >= beta_max {
        beta_max = beta_min * 1e3;
        beta_min = beta_max / 1e6;
    }
    (beta_min, beta_max)
}

struct ReadOutcome {
    /// State at the end of the schedule.
    final_bits: Vec<u8>,
    /// Lowest-energy state visited during the read.
    best_bits: Vec<u8>,
    proposals: u64,
    accepted: u64,
}

fn run_read<M: BinaryModel>(
    model: &M,
    sweeps: usize,
    beta_range: (f64, f64),
    seed: u64,
) -> ReadOutcome {
    let m = model.num_vars();
    let mut rng = Rng::seed_from_u64(seed);
    let mut bits: Vec<u8> = (0..m).map(|_| rng.bool() as u8).collect();
    let mut fields = model.local_fields(&bits);
    let mut energy = model.energy(&bits);
    let mut best_bits = bits.clone();
    let mut best_energy = energy;
    let (beta_min, beta_max) = beta_range;
    let ratio = beta_max / beta_min;
    let denom = if sweeps > 1 { (sweeps - 1) as f64 } else { 1.0 };

    let mut proposals = 0u64;
    let mut accepted = 0u64;
    for sweep in 0..sweeps {
        let beta = beta_min * ratio.powf(sweep as f64 / denom);
        for k in 0..m {
            proposals += 1;
            let delta = model.flip_delta(&bits, &fields, k);
            let accept = delta <= 0.0 || rng.f64() < (-beta * delta).exp();
            if accept {
                model.apply_flip(&mut bits, &mut fields, k);
                energy += delta;
                accepted += 1;
                if energy < best_energy {
                    best_energy = energy;
                    best_bits.copy_from_slice(&bits);
                }
            }
        }
    }

    ReadOutcome {
        final_bits: bits,
        best_bits,
        proposals,
        accepted,
    }
}

/// Samples low-energy states of a QUBO or Ising model.
///
/// Each read contributes its end-of-schedule state (reads freeze in varied
/// near-optimal states, which is what the full-response combination averages
/// over), and the single best state visited across all reads is added so the
/// returned minimum never regresses. The result is sorted, deduplicated and
/// truncated to `num_reads` samples.
///
/// Deterministic for fixed `(model, cfg)`: read `k` owns an RNG seeded with
/// `seed + k`, so concurrent execution of reads could not change the output.
/// With `SamplerMode::Exact` the call is forwarded to [`brute_force`].
pub fn anneal<M: BinaryModel>(model: &M, cfg: &SamplerConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let m = model.num_vars();
    if m == 0 {
        return Err(Error::InvalidOptions("model has no variables".into()));
    }
    if cfg.mode == SamplerMode::Exact {
        return brute_force(model, cfg.num_reads);
    }
    let beta_range = match cfg.beta_schedule {
        Some(range) => range,
        None => auto_beta_range(model),
    };

    let mut samples = Vec::with_capacity(cfg.num_reads + 1);
    let mut stats = AnnealStats::default();
    let mut best_seen: Option<Sample> = None;
    for read in 0..cfg.num_reads {
        let outcome = run_read(
            model,
            cfg.sweeps,
            beta_range,
            cfg.seed.wrapping_add(read as u64),
        );
        stats.proposals += outcome.proposals;
        stats.accepted_flips += outcome.accepted;
        stats.work_units += outcome.proposals + outcome.accepted * m as u64;
        // recompute exactly so recorded energies carry no incremental drift
        let best_energy = model.energy(&outcome.best_bits);
        if best_seen.as_ref().is_none_or(|b| best_energy < b.energy) {
            best_seen = Some(Sample {
                bits: outcome.best_bits,
                energy: best_energy,
            });
        }
        let energy = model.energy(&outcome.final_bits);
        samples.push(Sample {
            bits: outcome.final_bits,
            energy,
        });
    }
    samples.push(best_seen.expect("num_reads >= 1"));
    let mut set = SampleSet::from_raw(samples, stats);
    set.samples.truncate(cfg.num_reads);
    Ok(set)
}

/// Exact enumeration of every assignment via a Gray-code walk, keeping the
/// `top_k` lowest-energy states. The ideal-annealer oracle for small models.
pub fn brute_force<M: BinaryModel>(model: &M, top_k: usize) -> Result<SampleSet> {
    let m = model.num_vars();
    if m == 0 {
        return Err(Error::InvalidOptions("model has no variables".into()));
    }
    if m > BRUTE_FORCE_MAX_VARS {
        return Err(Error::Capacity {
            context: "brute_force enumeration",
            limit: BRUTE_FORCE_MAX_VARS,
            got: m,
        });
    }
    let top_k = top_k.max(1);
    let total: u64 = 1 << m;

    let mut bits = vec![0u8; m];
    let mut fields = model.local_fields(&bits);
    let mut energy = model.energy(&bits);

    // (energy, bits) kept sorted ascending; worst tail entry drops out
    let mut kept: Vec<(f64, Vec<u8>)> = vec![(energy, bits.clone())];

    for i in 1..total {
        let k = i.trailing_zeros() as usize;
        let delta = model.flip_delta(&bits, &fields, k);
        model.apply_flip(&mut bits, &mut fields, k);
        energy += delta;
        // periodic exact refresh against incremental round-off
        if i & 0xffff == 0 {
            energy = model.energy(&bits);
            fields = model.local_fields(&bits);
        }
        if kept.len() < top_k || energy < kept[kept.len() - 1].0 {
            let pos = kept.partition_point(|(e, _)| *e <= energy);
            kept.insert(pos, (energy, bits.clone()));
            if kept.len() > top_k {
                kept.pop();
            }
        }
    }

    let samples = kept
        .into_iter()
        .map(|(_, bits)| {
            let energy = model.energy(&bits);
            Sample { bits, energy }
        })
        .collect();
    let stats = AnnealStats {
        proposals: total,
        accepted_flips: total,
        work_units: total * (m as u64 + 1),
    };
    Ok(SampleSet::from_raw(samples, stats))
}

/// Energy-weighted combination of decoded vectors:
/// `(1/l) sum_i exp(-beta (E_i - E_0)) x_i` with `E_0` the lowest energy.
pub(crate) fn weighted_combination(decoded: &[(f64, Vec<f64>)], beta: f64) -> Vec<f64> {
    let e0 = decoded[0].0;
    let n = decoded[0].1.len();
    let l = decoded.len() as f64;
    let mut acc = vec![0.0; n];
    for (energy, x) in decoded {
        let w = (-beta * (energy - e0)).exp();
        axpy(&mut acc, w / l, x);
    }
    acc
}

/// Combines a full sampler response into one real vector, weighting sample
/// `i` by `exp(-beta (E_i - E_0))` and dividing by the sample count. With
/// `beta = 0` this is the plain average of the decoded samples; as
/// `beta -> inf` it approaches `decode(best) / l`.
pub fn full_response_combine(
    s: &SampleSet,
    enc: &Encoding,
    n: usize,
    beta: f64,
) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::InvalidOptions(format!(
            "full-response beta must be >= 0, got {beta}"
        )));
    }
    let decoded: Vec<(f64, Vec<f64>)> = s
        .iter()
        .map(|sample| Ok((sample.energy, enc.decode(&sample.bits, n)?)))
        .collect::<Result<_>>()?;
    Ok(weighted_combination(&decoded, beta))
}
