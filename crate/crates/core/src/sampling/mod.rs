//! Fault injection: fixed-weight (stratified) sampling, the i.i.d. baseline,
//! exhaustive enumeration for small circuits, and binomial weights.
//!
//! Every shot draws from its own ChaCha stream position, derived from the
//! seed, a caller-chosen stream id, the weight, and the shot index. Results
//! therefore do not depend on the number of worker threads.

mod binomial;
mod stats;

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{Decoder, DecoderError};
use crate::qepg::{Pauli, Qepg};

pub use binomial::{binomial_weight_probability, critical_region};
pub use stats::{read_stats_csv, write_stats_csv, BaselineResult, SubspaceStats, WeightTally};

/// Shots evaluated between stopping-rule checks.
pub const BATCH_SHOTS: u64 = 1000;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("weight {weight} outside [0, {num_locations}]")]
    WeightOutOfRange { weight: usize, num_locations: usize },
    #[error("physical error rate {0} must lie strictly between 0 and 1")]
    InvalidErrorRate(f64),
    #[error("target error count must be at least 1")]
    InvalidTarget,
    #[error("baseline sampling needs at least one stopping bound")]
    NoStoppingBound,
    #[error("failed to build thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub threads: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64) -> Self {
        Self { seed, threads: 0 }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The error target was crossed.
    Errors,
    /// The shot budget ran out first.
    Budget,
    /// The wall-clock limit fired.
    Time,
}

/// Stopping bounds for the baseline; at least one must be set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineStop {
    pub max_errors: Option<u64>,
    pub max_shots: Option<u64>,
    pub max_seconds: Option<f64>,
}

impl Default for BaselineStop {
    fn default() -> Self {
        Self {
            max_errors: Some(100),
            max_shots: None,
            max_seconds: None,
        }
    }
}

/// Stopping rule for one subspace: more than `target_errors` errors after at
/// least `min_shots` shots, bounded by `budget` shots and an optional deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceStop {
    pub target_errors: u64,
    pub min_shots: u64,
    pub budget: u64,
    pub deadline: Option<Instant>,
}

impl SubspaceStop {
    pub fn errors(target_errors: u64, budget: u64) -> Self {
        Self {
            target_errors,
            min_shots: 0,
            budget,
            deadline: None,
        }
    }
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Words of stream position reserved per shot (2^24 32-bit words).
const SHOT_STRIDE_BITS: u32 = 24;

struct Scratch {
    acc: Vec<u64>,
    perm: Vec<u32>,
    touched: Vec<u32>,
}

/// Stratified and i.i.d. sampler bound to one QEPG and decoder.
pub struct Sampler<'a, D: Decoder + ?Sized> {
    qepg: &'a Qepg,
    decoder: &'a D,
    cfg: SamplerConfig,
    base: ChaCha8Rng,
    pool: Option<rayon::ThreadPool>,
}

impl<'a, D: Decoder + ?Sized> Sampler<'a, D> {
    pub fn new(qepg: &'a Qepg, decoder: &'a D, cfg: SamplerConfig) -> Result<Self, SamplingError> {
        let pool = match cfg.threads {
            0 => None,
            n => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| SamplingError::ThreadPool(e.to_string()))?,
            ),
        };
        Ok(Self {
            qepg,
            decoder,
            cfg,
            base: ChaCha8Rng::seed_from_u64(cfg.seed),
            pool,
        })
    }

    pub fn config(&self) -> SamplerConfig {
        self.cfg
    }

    pub fn qepg(&self) -> &Qepg {
        self.qepg
    }

    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }

    fn shot_rng(&self, stream: u64, shot: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(stream);
        rng.set_word_pos((shot as u128) << SHOT_STRIDE_BITS);
        rng
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            acc: vec![0; self.qepg.words_per_row()],
            perm: (0..self.qepg.num_locations() as u32).collect(),
            touched: Vec::new(),
        }
    }

    fn check_weight(&self, w: usize) -> Result<(), SamplingError> {
        if w > self.qepg.num_locations() {
            return Err(SamplingError::WeightOutOfRange {
                weight: w,
                num_locations: self.qepg.num_locations(),
            });
        }
        Ok(())
    }

    fn is_logical_error(&self, acc: &[u64]) -> Result<bool, DecoderError> {
        let predicted = self.decoder.decode(acc)?;
        Ok(predicted != self.qepg.observable_mask(acc))
    }

    /// One weight-`w` shot: `w` distinct locations by partial Fisher-Yates,
    /// each with a uniform Pauli.
    fn weight_shot(&self, s: &mut Scratch, stream: u64, w: usize, shot: u64) -> Result<bool, DecoderError> {
        let c = self.qepg.num_locations();
        let mut rng = self.shot_rng(stream, shot);
        s.acc.fill(0);
        for i in 0..w {
            let j = rng.gen_range(i..c);
            s.perm.swap(i, j);
            s.touched.push(i as u32);
            s.touched.push(j as u32);
            let pauli = Pauli::from_index(rng.gen_range(0..3));
            self.qepg.xor_row_into(s.perm[i] as usize, pauli, &mut s.acc);
        }
        for &t in &s.touched {
            s.perm[t as usize] = t;
        }
        s.touched.clear();
        self.is_logical_error(&s.acc)
    }

    /// Error flags for shots `range` at weight `w`, in shot order.
    fn weight_flags(&self, stream: u64, w: usize, range: std::ops::Range<u64>) -> Result<Vec<bool>, DecoderError> {
        self.install(|| {
            range
                .into_par_iter()
                .map_init(|| self.scratch(), |s, shot| self.weight_shot(s, stream, w, shot))
                .collect()
        })
    }

    /// Samples `n_shots` shots at weight `w`.
    pub fn sample_weight(&self, stream: u64, w: usize, n_shots: u64) -> Result<SubspaceStats, SamplingError> {
        self.check_weight(w)?;
        let stream = mix64(stream ^ mix64(w as u64));
        let errors = self.install(|| {
            (0..n_shots)
                .into_par_iter()
                .map_init(
                    || self.scratch(),
                    |s, shot| self.weight_shot(s, stream, w, shot).map(u64::from),
                )
                .try_reduce(|| 0, |a, b| Ok(a + b))
        })?;
        Ok(SubspaceStats::new(w, n_shots, errors))
    }

    /// Samples at weight `w` until errors exceed `target_errors` or `budget`
    /// shots are used. Batches of [`BATCH_SHOTS`] are evaluated in parallel
    /// and then scanned in order, so the stop lands exactly on the crossing shot.
    pub fn sample_until_errors(
        &self,
        stream: u64,
        w: usize,
        target_errors: u64,
        budget: u64,
    ) -> Result<(SubspaceStats, StopReason), SamplingError> {
        self.sample_subspace(stream, w, SubspaceStop::errors(target_errors, budget))
    }

    /// [`Sampler::sample_until_errors`] with a shot floor and an optional
    /// deadline checked between batches.
    pub fn sample_subspace(
        &self,
        stream: u64,
        w: usize,
        stop: SubspaceStop,
    ) -> Result<(SubspaceStats, StopReason), SamplingError> {
        self.check_weight(w)?;
        if stop.target_errors == 0 {
            return Err(SamplingError::InvalidTarget);
        }
        let stream = mix64(stream ^ mix64(w as u64));
        let (mut shots, mut errors) = (0u64, 0u64);
        while shots < stop.budget {
            if stop.deadline.is_some_and(|d| Instant::now() >= d) {
                return Ok((SubspaceStats::new(w, shots, errors), StopReason::Time));
            }
            let end = (shots + BATCH_SHOTS).min(stop.budget);
            for flag in self.weight_flags(stream, w, shots..end)? {
                shots += 1;
                errors += u64::from(flag);
                if errors > stop.target_errors && shots >= stop.min_shots {
                    return Ok((SubspaceStats::new(w, shots, errors), StopReason::Errors));
                }
            }
        }
        Ok((SubspaceStats::new(w, shots, errors), StopReason::Budget))
    }

    /// One i.i.d. shot: each location faults with probability `p`, found by
    /// geometric skipping; returns (realized weight, logical error).
    fn iid_shot(&self, s: &mut Scratch, stream: u64, ln_q: f64, shot: u64) -> Result<(usize, bool), DecoderError> {
        let c = self.qepg.num_locations();
        let mut rng = self.shot_rng(stream, shot);
        s.acc.fill(0);
        let mut pos = 0usize;
        let mut weight = 0;
        loop {
            let u: f64 = 1.0 - rng.gen::<f64>();
            let skip = (u.ln() / ln_q).floor();
            if skip >= (c - pos) as f64 {
                break;
            }
            pos += skip as usize;
            let pauli = Pauli::from_index(rng.gen_range(0..3));
            self.qepg.xor_row_into(pos, pauli, &mut s.acc);
            weight += 1;
            pos += 1;
            if pos >= c {
                break;
            }
        }
        Ok((weight, self.is_logical_error(&s.acc)?))
    }

    /// Naive Monte Carlo at physical error rate `p`.
    pub fn sample_baseline(&self, stream: u64, p: f64, stop: BaselineStop) -> Result<BaselineResult, SamplingError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(SamplingError::InvalidErrorRate(p));
        }
        if stop.max_errors.is_none() && stop.max_shots.is_none() && stop.max_seconds.is_none() {
            return Err(SamplingError::NoStoppingBound);
        }
        const BASELINE_BATCH: u64 = 10_000;
        let stream = mix64(stream ^ 0xba5e_11e5);
        let ln_q = (-p).ln_1p();
        let started = Instant::now();
        let limit = stop.max_seconds.map(Duration::from_secs_f64);
        let mut result = BaselineResult::default();
        let mut shot = 0u64;
        loop {
            if let Some(max) = stop.max_shots {
                if shot >= max {
                    result.stop_reason = StopReason::Budget;
                    break;
                }
            }
            if limit.is_some_and(|l| started.elapsed() >= l) {
                result.stop_reason = StopReason::Time;
                break;
            }
            let end = stop
                .max_shots
                .map_or(shot + BASELINE_BATCH, |m| (shot + BASELINE_BATCH).min(m));
            let outcomes: Vec<(usize, bool)> = self.install(|| {
                (shot..end)
                    .into_par_iter()
                    .map_init(|| self.scratch(), |s, i| self.iid_shot(s, stream, ln_q, i))
                    .collect::<Result<_, _>>()
            })?;
            shot = end;
            let mut hit = false;
            for (w, err) in outcomes {
                result.record(w, err);
                if stop.max_errors.is_some_and(|m| result.logical_errors >= m) {
                    hit = true;
                    break;
                }
            }
            if hit {
                result.stop_reason = StopReason::Errors;
                break;
            }
        }
        result.elapsed_seconds = started.elapsed().as_secs_f64();
        Ok(result)
    }

    /// Exact tally over every weight-`w` fault set drawn from `paulis`:
    /// all location subsets times all Pauli assignments.
    pub fn enumerate_weight(&self, w: usize, paulis: &[Pauli]) -> Result<SubspaceStats, SamplingError> {
        self.check_weight(w)?;
        let c = self.qepg.num_locations();
        let mut locs: Vec<usize> = (0..w).collect();
        let mut acc = vec![0u64; self.qepg.words_per_row()];
        let (mut samples, mut errors) = (0u64, 0u64);
        loop {
            let mut choice = vec![0usize; w];
            loop {
                acc.fill(0);
                for (&l, &p) in locs.iter().zip(&choice) {
                    self.qepg.xor_row_into(l, paulis[p], &mut acc);
                }
                samples += 1;
                errors += u64::from(self.is_logical_error(&acc)?);
                if !next_digits(&mut choice, paulis.len()) {
                    break;
                }
            }
            if !next_combination(&mut locs, c) {
                break;
            }
        }
        Ok(SubspaceStats::new(w, samples, errors))
    }
}

/// Odometer increment in base `radix`; false once it wraps to all zeros.
fn next_digits(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Next `k`-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn sample_weight_w<D: Decoder + ?Sized>(
    g: &Qepg,
    dec: &D,
    w: usize,
    n_shots: u64,
    cfg: SamplerConfig,
) -> Result<SubspaceStats, SamplingError> {
    Sampler::new(g, dec, cfg)?.sample_weight(0, w, n_shots)
}

pub fn sample_until_errors<D: Decoder + ?Sized>(
    g: &Qepg,
    dec: &D,
    w: usize,
    target_errors: u64,
    budget: u64,
    cfg: SamplerConfig,
) -> Result<(SubspaceStats, StopReason), SamplingError> {
    Sampler::new(g, dec, cfg)?.sample_until_errors(0, w, target_errors, budget)
}

pub fn sample_baseline<D: Decoder + ?Sized>(
    g: &Qepg,
    dec: &D,
    p: f64,
    stop: BaselineStop,
    cfg: SamplerConfig,
) -> Result<BaselineResult, SamplingError> {
    Sampler::new(g, dec, cfg)?.sample_baseline(0, p, stop)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_and_digits() {
        let mut idx = vec![0, 1];
        let mut n = 1;
        while next_combination(&mut idx, 5) {
            n += 1;
        }
        assert_eq!(n, 10);
        let mut empty: Vec<usize> = vec![];
        assert!(!next_combination(&mut empty, 3));
        let mut d = vec![0, 0];
        let mut n = 1;
        while next_digits(&mut d, 3) {
            n += 1;
        }
        assert_eq!(n, 9);
    }
}
