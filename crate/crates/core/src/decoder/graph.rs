use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DecoderError;
use crate::qepg::{Pauli, Qepg};

/// Per-fault probability used to turn edge multiplicities into weights.
///
/// All single faults are equally likely under uniform depolarizing noise, so
/// only the multiplicity `m` distinguishes edges; `-ln(m q)` stays positive
/// for any realistic `m`.
pub const REFERENCE_FAULT_PROBABILITY: f64 = 1e-3;

/// An edge between two detectors, or between a detector and the boundary
/// (`v == num_detectors`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub observables: u64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorGraph {
    num_detectors: usize,
    edges: Vec<Edge>,
    undetectable_logical_faults: usize,
}

impl DetectorGraph {
    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    /// Node index of the boundary.
    pub fn boundary(&self) -> usize {
        self.num_detectors
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Single faults that flip an observable without flipping any detector.
    pub fn undetectable_logical_faults(&self) -> usize {
        self.undetectable_logical_faults
    }
}

/// Builds the matching graph from the X and Z rows of every location.
///
/// A Y fault is the product of the X and Z faults at the same location, so it
/// is represented by those two edges, and it adds one to the multiplicity of
/// each. Faults with the same detector pair but different observable masks are
/// merged into the majority mask.
pub fn build_detector_graph(g: &Qepg) -> Result<DetectorGraph, DecoderError> {
    if g.num_observables() > 64 {
        return Err(DecoderError::TooManyObservables(g.num_observables()));
    }
    let boundary = g.num_detectors();
    let mut classes: BTreeMap<(usize, usize), BTreeMap<u64, u32>> = BTreeMap::new();
    let mut undetectable_logical_faults = 0;
    for location in 0..g.num_locations() {
        for pauli in [Pauli::X, Pauli::Z] {
            let row = g.row(location, pauli);
            let dets: Vec<usize> = g.detectors_in(row).take(3).collect();
            let observables = g.observable_mask(row);
            let key = match dets.as_slice() {
                [] => {
                    if observables != 0 {
                        undetectable_logical_faults += 1;
                    }
                    continue;
                }
                [a] => (*a, boundary),
                [a, b] => (*a, *b),
                _ => {
                    return Err(DecoderError::NotMatchable {
                        location,
                        pauli,
                        detectors: g.detectors_in(row).count(),
                    })
                }
            };
            *classes.entry(key).or_default().entry(observables).or_default() += 2;
        }
    }
    let edges = classes
        .into_iter()
        .map(|((u, v), masks)| {
            let (&observables, &multiplicity) = masks
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .expect("non-empty class");
            let p = (multiplicity as f64 * REFERENCE_FAULT_PROBABILITY).min(0.5);
            Edge {
                u,
                v,
                weight: -p.ln(),
                observables,
                multiplicity,
            }
        })
        .collect();
    Ok(DetectorGraph {
        num_detectors: g.num_detectors(),
        edges,
        undetectable_logical_faults,
    })
}
