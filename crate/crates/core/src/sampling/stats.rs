use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};

use super::StopReason;

/// Tally for one weight subspace. The ratio is always computed from the
/// counts; serialized forms carry it as a convenience column only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "StatsRecord", try_from = "StatsRecord")]
pub struct SubspaceStats {
    weight: usize,
    samples: u64,
    errors: u64,
}

#[derive(Serialize, Deserialize)]
struct StatsRecord {
    weight: usize,
    samples: u64,
    errors: u64,
    #[serde(default)]
    p_hat: Option<f64>,
}

impl From<SubspaceStats> for StatsRecord {
    fn from(s: SubspaceStats) -> Self {
        Self {
            weight: s.weight,
            samples: s.samples,
            errors: s.errors,
            p_hat: Some(s.p_hat()),
        }
    }
}

impl TryFrom<StatsRecord> for SubspaceStats {
    type Error = String;

    fn try_from(r: StatsRecord) -> Result<Self, String> {
        if r.errors > r.samples {
            return Err(format!(
                "weight {}: {} errors exceed {} samples",
                r.weight, r.errors, r.samples
            ));
        }
        Ok(Self::new(r.weight, r.samples, r.errors))
    }
}

impl SubspaceStats {
    pub fn new(weight: usize, samples: u64, errors: u64) -> Self {
        assert!(errors <= samples, "more errors than samples");
        Self {
            weight,
            samples,
            errors,
        }
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn num_samples(&self) -> u64 {
        self.samples
    }

    pub fn num_logical_errors(&self) -> u64 {
        self.errors
    }

    /// Observed logical error fraction; 0 when nothing was sampled.
    pub fn p_hat(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.errors as f64 / self.samples as f64
        }
    }

    /// Pools two tallies of the same weight.
    pub fn merged(self, other: SubspaceStats) -> SubspaceStats {
        assert_eq!(self.weight, other.weight);
        Self::new(self.weight, self.samples + other.samples, self.errors + other.errors)
    }
}

pub fn write_stats_csv<W: io::Write>(w: W, stats: &[SubspaceStats]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for s in stats {
        wtr.serialize(s)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_stats_csv<R: io::Read>(r: R) -> csv::Result<Vec<SubspaceStats>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r)
        .deserialize()
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightTally {
    pub samples: u64,
    pub errors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub shots: u64,
    pub logical_errors: u64,
    pub p_hat: f64,
    pub weight_histogram: BTreeMap<usize, WeightTally>,
    pub stop_reason: StopReason,
    pub elapsed_seconds: f64,
}

impl Default for BaselineResult {
    fn default() -> Self {
        Self {
            shots: 0,
            logical_errors: 0,
            p_hat: 0.0,
            weight_histogram: BTreeMap::new(),
            stop_reason: StopReason::Budget,
            elapsed_seconds: 0.0,
        }
    }
}

impl BaselineResult {
    pub(super) fn record(&mut self, weight: usize, error: bool) {
        self.shots += 1;
        self.logical_errors += u64::from(error);
        let t = self.weight_histogram.entry(weight).or_default();
        t.samples += 1;
        t.errors += u64::from(error);
        self.p_hat = self.logical_errors as f64 / self.shots as f64;
    }

    /// Histogram rows as subspace tallies, ascending in weight.
    pub fn histogram_stats(&self) -> Vec<SubspaceStats> {
        self.weight_histogram
            .iter()
            .map(|(&w, t)| SubspaceStats::new(w, t.samples, t.errors))
            .collect()
    }

    /// Normal-approximation standard error of `p_hat`.
    pub fn std_error(&self) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        (self.p_hat * (1.0 - self.p_hat) / self.shots as f64).sqrt()
    }
}
