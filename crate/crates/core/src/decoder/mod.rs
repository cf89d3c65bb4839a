//! Decoders: map a detector syndrome to predicted observable flips.
//!
//! Syndromes are packed words as produced by XOR-ing [`Qepg`](crate::Qepg)
//! rows; bits at index `>= num_detectors` are ignored, so raw rows (which
//! carry observable bits after the detectors) can be passed directly.
//! Predictions are masks with bit `k` set when observable `k` is predicted
//! to have flipped.

mod blossom;
mod graph;
mod lookup;
mod matching;

use thiserror::Error;

use crate::qepg::Pauli;

pub use blossom::max_weight_matching;
pub use graph::{build_detector_graph, DetectorGraph, Edge, REFERENCE_FAULT_PROBABILITY};
pub use lookup::{Correction, LookupDecoder};
pub use matching::{LargeDefectStrategy, MatchingConfig, MatchingDecoder, MatchingOutcome, Method};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecoderError {
    #[error("fault at location {location} ({pauli:?}) flips {detectors} detectors; matching needs at most 2")]
    NotMatchable {
        location: usize,
        pauli: Pauli,
        detectors: usize,
    },
    #[error("{0} observables exceed the 64 supported by prediction masks")]
    TooManyObservables(usize),
    #[error("{defects} defects exceed the exact-matching limit {limit} and no fallback is enabled")]
    TooManyDefects { defects: usize, limit: usize },
}

pub trait Decoder: Send + Sync {
    fn num_detectors(&self) -> usize;

    /// Predicted observable-flip mask for a packed syndrome.
    fn decode(&self, syndrome: &[u64]) -> Result<u64, DecoderError>;
}

impl<D: Decoder + ?Sized> Decoder for &D {
    fn num_detectors(&self) -> usize {
        (**self).num_detectors()
    }

    fn decode(&self, syndrome: &[u64]) -> Result<u64, DecoderError> {
        (**self).decode(syndrome)
    }
}

impl<D: Decoder + ?Sized> Decoder for Box<D> {
    fn num_detectors(&self) -> usize {
        (**self).num_detectors()
    }

    fn decode(&self, syndrome: &[u64]) -> Result<u64, DecoderError> {
        (**self).decode(syndrome)
    }
}

/// Detector-only copy of a syndrome with trailing bits cleared.
pub(crate) fn mask_syndrome(syndrome: &[u64], num_detectors: usize) -> Vec<u64> {
    let n = num_detectors.div_ceil(64);
    let mut out: Vec<u64> = syndrome.iter().copied().take(n).collect();
    out.resize(n, 0);
    if !num_detectors.is_multiple_of(64) {
        out[n - 1] &= (1u64 << (num_detectors % 64)) - 1;
    }
    out
}
