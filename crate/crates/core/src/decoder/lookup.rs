use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{mask_syndrome, Decoder, DecoderError};
use crate::qepg::{Pauli, Qepg};

/// Single-fault explanation of a syndrome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub location: usize,
    pub pauli: Pauli,
    pub observables: u64,
}

/// Table decoder over single-fault syndromes.
///
/// Each non-trivial syndrome produced by one fault maps to the observable mask
/// shared by most of the faults producing it (ties go to the smaller mask).
/// The stored correction is the lowest-indexed fault with that mask. Any other
/// syndrome decodes to "no error".
#[derive(Debug, Clone)]
pub struct LookupDecoder {
    num_detectors: usize,
    table: HashMap<Vec<u64>, Correction>,
}

impl LookupDecoder {
    /// Builds the table from the rows of the given Paulis.
    pub fn from_qepg(g: &Qepg, paulis: &[Pauli]) -> Result<Self, DecoderError> {
        if g.num_observables() > 64 {
            return Err(DecoderError::TooManyObservables(g.num_observables()));
        }
        // syndrome -> observable mask -> (count, first correction)
        let mut classes: HashMap<Vec<u64>, Vec<(u64, usize, Correction)>> = HashMap::new();
        for location in 0..g.num_locations() {
            for &pauli in paulis {
                let row = g.row(location, pauli);
                let syndrome = g.syndrome_words(row);
                if syndrome.iter().all(|&w| w == 0) {
                    continue;
                }
                let observables = g.observable_mask(row);
                let entry = classes.entry(syndrome).or_default();
                match entry.iter_mut().find(|c| c.0 == observables) {
                    Some(c) => c.1 += 1,
                    None => entry.push((
                        observables,
                        1,
                        Correction {
                            location,
                            pauli,
                            observables,
                        },
                    )),
                }
            }
        }
        let table = classes
            .into_iter()
            .map(|(s, options)| {
                let best = options
                    .iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                    .expect("non-empty class");
                (s, best.2)
            })
            .collect();
        Ok(Self {
            num_detectors: g.num_detectors(),
            table,
        })
    }

    pub fn lookup(&self, syndrome: &[u64]) -> Option<&Correction> {
        self.table.get(&mask_syndrome(syndrome, self.num_detectors))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Decoder for LookupDecoder {
    fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    fn decode(&self, syndrome: &[u64]) -> Result<u64, DecoderError> {
        Ok(self.lookup(syndrome).map_or(0, |c| c.observables))
    }
}
