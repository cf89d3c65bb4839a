//! The adaptive subspace sampler and the end-to-end estimate.
//!
//! A run has three sampling stages followed by the weighted sum:
//!
//! 1. galloping search for `w_err` (first weight with an observed logical
//!    error in a fixed probe) and the empirical `w_sat` (last weight whose
//!    probe rate stays at or below 0.25)
//! 2. evenly spaced subspaces over `[w_err, w_sat]`
//! 3. fit, locate the sweet spot, step below the lowest sampled weight, repeat
//!
//! Each stage samples on its own RNG stream, so a run is reproducible from
//! its seed and independent of the thread count.

mod estimate;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::decoder::{Decoder, DecoderError, MatchingConfig, MatchingDecoder};
use crate::qepg::Qepg;
use crate::sampling::{Sampler, SamplerConfig, SamplingError, StopReason, SubspaceStats, SubspaceStop};
use crate::scurve::{fit, DataPoint, FitError, FitOptions, FitResult, Variant};

pub use estimate::{estimate_logical_error_rate, Estimate};

pub const SCHEMA_VERSION: u32 = 1;

const STREAM_PROBE: u64 = 1;
const STREAM_INITIAL: u64 = 2;
const STREAM_ITERATIVE: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdapSamConfig {
    /// Total shot budget across all stages, probes included.
    pub s_max: u64,
    /// A subspace is complete once it has more than this many logical errors.
    pub n_le: u64,
    /// Curvature threshold for the sweet spot.
    pub gamma: f64,
    pub binary_search_shots: u64,
    /// Shot floor per stage-2/3 subspace.
    pub min_subspace_shots: u64,
    /// Cap on the number of stage-2/3 subspaces.
    pub max_subspaces: usize,
    pub initial_points: usize,
    pub max_seconds: Option<f64>,
    pub variant: Variant,
    pub weighted_fit: bool,
}

impl Default for AdapSamConfig {
    fn default() -> Self {
        Self {
            s_max: 5_000_000,
            n_le: 30,
            gamma: 1.0,
            binary_search_shots: 1000,
            min_subspace_shots: 10_000,
            max_subspaces: 10,
            initial_points: 5,
            max_seconds: None,
            variant: Variant::Ours,
            weighted_fit: true,
        }
    }
}

impl AdapSamConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.n_le == 0 {
            return bad("n_le must be at least 1".into());
        }
        if self.s_max < 10 * self.n_le {
            return bad(format!(
                "s_max = {} is below 10 * n_le = {}",
                self.s_max,
                10 * self.n_le
            ));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if self.binary_search_shots == 0 {
            return bad("binary_search_shots must be at least 1".into());
        }
        if self.initial_points < 3 || self.max_subspaces < self.initial_points {
            return bad(format!(
                "need 3 <= initial_points ({}) <= max_subspaces ({})",
                self.initial_points, self.max_subspaces
            ));
        }
        if self.max_seconds.is_some_and(|s| s.is_nan() || s <= 0.0) {
            return bad("max_seconds must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no logical errors observed at any weight up to {num_locations}")]
    NoErrorsAnywhere { num_locations: usize },
    #[error("budget exhausted after {total_shots} shots before a curve could be fitted")]
    BudgetExhausted {
        total_shots: u64,
        subspaces: Vec<SubspaceStats>,
    },
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStop {
    /// The lowest sampled weight reached the sweet spot.
    SweetSpotReached,
    /// The subspace cap was hit first.
    SubspaceLimit,
    /// No lower weight above the fault-tolerant zone remains.
    OnsetReached,
    Budget,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFlag {
    /// The final fit needed the positivity-constrained search.
    FitProjected,
    /// An intermediate fit needed projection; the previous fit was kept and
    /// the next subspace forced one step down.
    PositivityFallback,
    /// `w_sweet <= w_err <= w_sat` does not hold.
    WeightOrder,
    /// The model never reaches 0.25 below the search cap.
    SaturationCapped,
    /// The run ended on the shot budget or the clock.
    Partial,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageShots {
    pub binary_search: u64,
    pub initial: u64,
    pub iterative: u64,
}

impl StageShots {
    pub fn total(&self) -> u64 {
        self.binary_search + self.initial + self.iterative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub p_l_hat: f64,
    pub p: f64,
    pub distance: u32,
    pub t: u32,
    pub num_locations: usize,
    pub w_err: usize,
    /// From the probe search.
    pub w_sat_empirical: usize,
    pub w_sweet: u64,
    /// From the fitted model.
    pub w_sat: u64,
    pub critical_region: Option<(usize, usize)>,
    /// Every sampled weight, probes merged in, ascending.
    pub subspaces: Vec<SubspaceStats>,
    /// Stage-2/3 weights in the order they were sampled.
    pub schedule: Vec<usize>,
    pub fit: FitResult,
    pub total_shots: u64,
    pub stage_shots: StageShots,
    pub stop_reason: RunStop,
    pub flags: Vec<ReportFlag>,
    pub seed: u64,
    pub config: AdapSamConfig,
}

impl EstimateReport {
    /// Recomputes the weighted sum from the serialized fit.
    pub fn recompute_estimate(&self) -> Estimate {
        estimate_logical_error_rate(&self.fit.model, self.num_locations, self.p)
    }
}

/// Result of the iterative stage.
#[derive(Debug, Clone, PartialEq)]
pub struct IterativeOutcome {
    pub fit: FitResult,
    pub w_sweet: u64,
    pub stop: RunStop,
    pub fallback: bool,
}

/// Driver state for one run; stages are public for step-wise use.
pub struct AdapSam<'a, D: Decoder + ?Sized> {
    sampler: Sampler<'a, D>,
    cfg: AdapSamConfig,
    t: usize,
    probes: BTreeMap<usize, SubspaceStats>,
    subspaces: BTreeMap<usize, SubspaceStats>,
    schedule: Vec<usize>,
    shots: StageShots,
    deadline: Option<Instant>,
    halted: Option<RunStop>,
}

impl<'a, D: Decoder + ?Sized> AdapSam<'a, D> {
    pub fn new(
        qepg: &'a Qepg,
        decoder: &'a D,
        t: u32,
        cfg: AdapSamConfig,
        sampler_cfg: SamplerConfig,
    ) -> Result<Self, PipelineError> {
        cfg.validate()?;
        Ok(Self {
            sampler: Sampler::new(qepg, decoder, sampler_cfg)?,
            cfg,
            t: t as usize,
            probes: BTreeMap::new(),
            subspaces: BTreeMap::new(),
            schedule: Vec::new(),
            shots: StageShots::default(),
            deadline: cfg.max_seconds.map(|s| Instant::now() + Duration::from_secs_f64(s)),
            halted: None,
        })
    }

    pub fn total_shots(&self) -> u64 {
        self.shots.total()
    }

    pub fn stage_shots(&self) -> StageShots {
        self.shots
    }

    /// Why sampling stopped early, if it did.
    pub fn halted(&self) -> Option<RunStop> {
        self.halted
    }

    fn remaining(&self) -> u64 {
        self.cfg.s_max.saturating_sub(self.total_shots())
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn num_locations(&self) -> usize {
        self.sampler.qepg().num_locations()
    }

    /// Fixed-size probe at `w`, cached per weight.
    fn probe(&mut self, w: usize) -> Result<Option<SubspaceStats>, PipelineError> {
        if let Some(s) = self.probes.get(&w) {
            return Ok(Some(*s));
        }
        if self.out_of_time() {
            self.halted = Some(RunStop::Time);
            return Ok(None);
        }
        if self.remaining() < self.cfg.binary_search_shots {
            self.halted = Some(RunStop::Budget);
            return Ok(None);
        }
        let s = self
            .sampler
            .sample_weight(STREAM_PROBE, w, self.cfg.binary_search_shots)?;
        self.shots.binary_search += s.num_samples();
        self.probes.insert(w, s);
        Ok(Some(s))
    }

    /// Finds `w_err` and the empirical `w_sat` by galloping upward from
    /// `t + 1` and bisecting, assuming the probe rate grows with weight.
    pub fn binary_search_stage(&mut self) -> Result<(usize, usize), PipelineError> {
        let c = self.num_locations();
        let exhausted = |s: &Self| PipelineError::BudgetExhausted {
            total_shots: s.total_shots(),
            subspaces: s.probes.values().copied().collect(),
        };
        let onset = (self.t + 1).min(c);

        // Smallest weight whose probe sees an error.
        let mut below = self.t;
        let mut step = 1;
        let mut above = loop {
            let w = (self.t + step).min(c);
            let s = self.probe(w)?.ok_or_else(|| exhausted(self))?;
            if s.num_logical_errors() > 0 {
                break w;
            }
            if w == c {
                return Err(PipelineError::NoErrorsAnywhere { num_locations: c });
            }
            below = w;
            step *= 2;
        };
        while above - below > 1 {
            let mid = below + (above - below) / 2;
            let s = self.probe(mid)?.ok_or_else(|| exhausted(self))?;
            if s.num_logical_errors() > 0 {
                above = mid;
            } else {
                below = mid;
            }
        }
        let w_err = above.max(onset);

        // Largest weight whose probe rate stays at or below 0.25.
        let mut low = w_err;
        let mut step = 1;
        let mut high = loop {
            let w = (w_err + step).min(c);
            if w == low {
                break c + 1;
            }
            let s = self.probe(w)?.ok_or_else(|| exhausted(self))?;
            if s.p_hat() > 0.25 {
                break w;
            }
            if w == c {
                break c + 1;
            }
            low = w;
            step *= 2;
        };
        while high - low > 1 {
            let mid = low + (high - low) / 2;
            let s = self.probe(mid)?.ok_or_else(|| exhausted(self))?;
            if s.p_hat() > 0.25 {
                high = mid;
            } else {
                low = mid;
            }
        }
        Ok((w_err, low))
    }

    /// Samples one stage-2/3 subspace; returns false when the run must stop.
    fn sample_subspace(&mut self, stream: u64, w: usize) -> Result<bool, PipelineError> {
        if self.out_of_time() {
            self.halted = Some(RunStop::Time);
            return Ok(false);
        }
        let budget = self.remaining();
        if budget == 0 {
            self.halted = Some(RunStop::Budget);
            return Ok(false);
        }
        let stop = SubspaceStop {
            target_errors: self.cfg.n_le,
            min_shots: self.cfg.min_subspace_shots,
            budget,
            deadline: self.deadline,
        };
        let (s, reason) = self.sampler.sample_subspace(stream, w, stop)?;
        match stream {
            STREAM_INITIAL => self.shots.initial += s.num_samples(),
            _ => self.shots.iterative += s.num_samples(),
        }
        if s.num_samples() > 0 {
            let merged = match self.subspaces.get(&w) {
                Some(prev) => prev.merged(s),
                None => s,
            };
            self.subspaces.insert(w, merged);
            self.schedule.push(w);
        }
        match reason {
            StopReason::Errors => Ok(true),
            StopReason::Budget => {
                self.halted = Some(RunStop::Budget);
                Ok(false)
            }
            StopReason::Time => {
                self.halted = Some(RunStop::Time);
                Ok(false)
            }
        }
    }

    /// Samples `initial_points` evenly spaced weights over `[w_err, w_sat]`,
    /// endpoints included, rounded and deduplicated.
    pub fn initial_sampling_stage(&mut self, w_err: usize, w_sat: usize) -> Result<Vec<SubspaceStats>, PipelineError> {
        for w in spaced_weights(w_err, w_sat, self.cfg.initial_points) {
            if !self.sample_subspace(STREAM_INITIAL, w)? {
                break;
            }
        }
        Ok(self.subspaces.values().copied().collect())
    }

    /// Fit dataset: every stage-2/3 subspace, plus probes with a rate strictly
    /// between 0 and 0.5. A weight present in both is pooled.
    pub fn dataset(&self) -> Vec<SubspaceStats> {
        let mut all: BTreeMap<usize, SubspaceStats> = self.subspaces.clone();
        for (&w, &p) in &self.probes {
            let usable = p.p_hat() > 0.0 && p.p_hat() < 0.5;
            match all.get(&w) {
                Some(s) => {
                    all.insert(w, s.merged(p));
                }
                None if usable => {
                    all.insert(w, p);
                }
                None => {}
            }
        }
        all.into_values().collect()
    }

    fn fit_now(&self) -> Result<FitResult, FitError> {
        let data: Vec<DataPoint> = self.dataset().iter().map(DataPoint::from).collect();
        fit(
            &data,
            self.cfg.variant,
            self.t as u32,
            FitOptions {
                weighted: self.cfg.weighted_fit,
                ..FitOptions::default()
            },
        )
    }

    /// Refits after each new subspace and steps toward the estimated sweet
    /// spot by `ceil((w_err - w_sweet) / 5)` below the lowest sampled weight.
    pub fn iterative_stage(&mut self, w_err: usize) -> Result<IterativeOutcome, PipelineError> {
        let mut kept: Option<FitResult> = None;
        let mut fallback = false;
        let mut force_step = false;
        let stop = loop {
            let current = self.fit_now()?;
            if current.projected && kept.is_some() {
                fallback = true;
                force_step = true;
            } else {
                kept = Some(current.clone());
            }
            let model = kept.as_ref().map_or(current.model, |f| f.model);
            let w_sweet = model.w_sweet(self.cfg.gamma) as usize;
            let w_front = *self.subspaces.keys().next().expect("initial stage sampled");
            if let Some(h) = self.halted {
                break h;
            }
            if !force_step && w_front <= w_sweet {
                break RunStop::SweetSpotReached;
            }
            if self.subspaces.len() >= self.cfg.max_subspaces {
                break RunStop::SubspaceLimit;
            }
            if w_front <= self.t + 1 {
                break RunStop::OnsetReached;
            }
            let w_new = if force_step {
                w_front - 1
            } else {
                let dw = w_err.saturating_sub(w_sweet).div_ceil(5).max(1);
                w_front.saturating_sub(dw).max(w_sweet)
            }
            .max(self.t + 1);
            force_step = false;
            if !self.sample_subspace(STREAM_ITERATIVE, w_new)? {
                continue;
            }
        };
        let last = self.fit_now()?;
        let fit = match kept {
            Some(k) if last.projected => {
                fallback = true;
                k
            }
            _ => last,
        };
        let w_sweet = fit.model.w_sweet(self.cfg.gamma);
        Ok(IterativeOutcome {
            fit,
            w_sweet,
            stop,
            fallback,
        })
    }

    pub fn schedule(&self) -> &[usize] {
        &self.schedule
    }
}

/// `n` rounded, evenly spaced integers over `[lo, hi]`, deduplicated.
pub fn spaced_weights(lo: usize, hi: usize, n: usize) -> Vec<usize> {
    assert!(lo <= hi && n >= 1);
    let mut out: Vec<usize> = (0..n)
        .map(|i| {
            if n == 1 {
                lo
            } else {
                lo + ((hi - lo) as f64 * i as f64 / (n - 1) as f64).round() as usize
            }
        })
        .collect();
    out.dedup();
    out
}

/// Runs all stages on a compiled circuit with the given decoder.
pub fn run_scaler_with<D: Decoder + ?Sized>(
    qepg: &Qepg,
    decoder: &D,
    distance: u32,
    p: f64,
    cfg: AdapSamConfig,
    sampler_cfg: SamplerConfig,
) -> Result<EstimateReport, PipelineError> {
    if distance.is_multiple_of(2) || distance == 0 {
        return Err(PipelineError::Config(format!("distance must be odd, got {distance}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(PipelineError::Config(format!(
            "physical error rate {p} must lie in (0, 1)"
        )));
    }
    let t = (distance - 1) / 2;
    let mut run = AdapSam::new(qepg, decoder, t, cfg, sampler_cfg)?;
    let (w_err, w_sat_empirical) = run.binary_search_stage()?;
    run.initial_sampling_stage(w_err, w_sat_empirical)?;
    let outcome = match run.iterative_stage(w_err) {
        Ok(o) => o,
        Err(PipelineError::Fit(FitError::InsufficientData { .. })) if run.halted().is_some() => {
            return Err(PipelineError::BudgetExhausted {
                total_shots: run.total_shots(),
                subspaces: run.dataset(),
            })
        }
        Err(e) => return Err(e),
    };

    let c = qepg.num_locations();
    let estimate = estimate_logical_error_rate(&outcome.fit.model, c, p);
    let saturation = outcome.fit.model.w_sat();
    let mut flags = Vec::new();
    if outcome.fit.projected {
        flags.push(ReportFlag::FitProjected);
    }
    if outcome.fallback {
        flags.push(ReportFlag::PositivityFallback);
    }
    if !(outcome.w_sweet as usize <= w_err && w_err <= w_sat_empirical) {
        flags.push(ReportFlag::WeightOrder);
    }
    if saturation.capped {
        flags.push(ReportFlag::SaturationCapped);
    }
    if matches!(outcome.stop, RunStop::Budget | RunStop::Time) {
        flags.push(ReportFlag::Partial);
    }
    Ok(EstimateReport {
        schema_version: SCHEMA_VERSION,
        p_l_hat: estimate.p_l_hat,
        p,
        distance,
        t,
        num_locations: c,
        w_err,
        w_sat_empirical,
        w_sweet: outcome.w_sweet,
        w_sat: saturation.weight,
        critical_region: estimate.critical_region,
        subspaces: run.dataset(),
        schedule: run.schedule().to_vec(),
        fit: outcome.fit,
        total_shots: run.total_shots(),
        stage_shots: run.stage_shots(),
        stop_reason: outcome.stop,
        flags,
        seed: sampler_cfg.seed,
        config: cfg,
    })
}

/// Compiles `circuit`, builds the matching decoder, and runs all stages.
pub fn run_scaler(
    circuit: &Circuit,
    distance: u32,
    p: f64,
    cfg: AdapSamConfig,
    sampler_cfg: SamplerConfig,
) -> Result<EstimateReport, PipelineError> {
    let qepg = Qepg::compile(circuit);
    let decoder = MatchingDecoder::from_qepg(&qepg, MatchingConfig::default())?;
    run_scaler_with(&qepg, &decoder, distance, p, cfg, sampler_cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_matches_reference_schedule() {
        assert_eq!(spaced_weights(21, 65, 5), vec![21, 32, 43, 54, 65]);
        assert_eq!(spaced_weights(7, 7, 5), vec![7]);
        assert_eq!(spaced_weights(4, 6, 5), vec![4, 5, 6]);
    }

    #[test]
    fn config_validation() {
        assert!(AdapSamConfig::default().validate().is_ok());
        let zero = AdapSamConfig {
            s_max: 0,
            ..AdapSamConfig::default()
        };
        assert!(matches!(zero.validate(), Err(PipelineError::Config(_))));
        let gamma = AdapSamConfig {
            gamma: 0.0,
            ..AdapSamConfig::default()
        };
        assert!(gamma.validate().is_err());
    }
}
