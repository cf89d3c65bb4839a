//! Circuit data model and fault-location enumeration.
//!
//! A [`Circuit`] is a flat list of single-gate [`Operation`]s together with
//! detector and observable declarations. Declarations reference measurement
//! records by absolute index (the order in which measuring operations appear).
//!
//! Fault locations follow one rule: every qubit touched by a gate or a
//! measurement is a location, and the fault is applied just *before* that
//! operation. Resets and `TICK` carry no location; an explicit `I` idle gate
//! carries one.

mod generate;
mod parse;

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_code, CodeFamily, CodeSpec, GenerateError};
pub use parse::{parse_circuit, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    Reset,
    Measure,
    MeasureReset,
    PauliX,
    PauliY,
    PauliZ,
    Hadamard,
    Phase,
    Cnot,
    Idle,
    Tick,
}

impl OpKind {
    pub const ALL: [OpKind; 11] = [
        OpKind::Reset,
        OpKind::Measure,
        OpKind::MeasureReset,
        OpKind::PauliX,
        OpKind::PauliY,
        OpKind::PauliZ,
        OpKind::Hadamard,
        OpKind::Phase,
        OpKind::Cnot,
        OpKind::Idle,
        OpKind::Tick,
    ];

    /// Canonical instruction name used by the text format.
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Reset => "R",
            OpKind::Measure => "M",
            OpKind::MeasureReset => "MR",
            OpKind::PauliX => "X",
            OpKind::PauliY => "Y",
            OpKind::PauliZ => "Z",
            OpKind::Hadamard => "H",
            OpKind::Phase => "S",
            OpKind::Cnot => "CX",
            OpKind::Idle => "I",
            OpKind::Tick => "TICK",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            OpKind::Tick => 0,
            OpKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, OpKind::Measure | OpKind::MeasureReset)
    }

    /// Whether each target of this operation is a fault location.
    pub fn has_fault_locations(self) -> bool {
        !matches!(self, OpKind::Reset | OpKind::Tick)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Operation {
    kind: OpKind,
    targets: Vec<u32>,
}

impl Operation {
    pub fn new(kind: OpKind, targets: &[u32]) -> Result<Self, CircuitError> {
        if targets.len() != kind.arity() {
            return Err(CircuitError::Arity {
                kind,
                got: targets.len(),
            });
        }
        if kind == OpKind::Cnot && targets[0] == targets[1] {
            return Err(CircuitError::RepeatedTarget(targets[0]));
        }
        Ok(Self {
            kind,
            targets: targets.to_vec(),
        })
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }
}

/// Parity of a set of measurement records (absolute indices).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RecordParity {
    pub records: Vec<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("{} takes {} target(s), got {got}", kind.name(), kind.arity())]
    Arity { kind: OpKind, got: usize },
    #[error("two-qubit gate applied to qubit {0} twice")]
    RepeatedTarget(u32),
    #[error("measurement record {record} does not exist ({available} measurements so far)")]
    RecordOutOfRange { record: usize, available: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<Operation>,
    detectors: Vec<RecordParity>,
    observables: Vec<RecordParity>,
}

impl Circuit {
    /// Builds a circuit, checking that every record reference exists. The qubit
    /// count is one past the largest qubit index used.
    pub fn new(
        ops: Vec<Operation>,
        detectors: Vec<RecordParity>,
        observables: Vec<RecordParity>,
    ) -> Result<Self, CircuitError> {
        let num_qubits = ops
            .iter()
            .flat_map(|op| op.targets.iter())
            .map(|&q| q as usize + 1)
            .max()
            .unwrap_or(0);
        let available = ops.iter().filter(|op| op.kind.is_measurement()).count();
        for parity in detectors.iter().chain(observables.iter()) {
            if let Some(&record) = parity.records.iter().find(|&&r| r >= available) {
                return Err(CircuitError::RecordOutOfRange { record, available });
            }
        }
        Ok(Self {
            num_qubits,
            ops,
            detectors,
            observables,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn detectors(&self) -> &[RecordParity] {
        &self.detectors
    }

    pub fn observables(&self) -> &[RecordParity] {
        &self.observables
    }

    pub fn num_measurements(&self) -> usize {
        self.ops.iter().filter(|op| op.kind.is_measurement()).count()
    }

    /// Number of fault locations `C`.
    pub fn num_fault_locations(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| op.kind.has_fault_locations())
            .map(|op| op.targets.len())
            .sum()
    }

    /// Serializes to the text format accepted by [`parse_circuit`].
    ///
    /// Consecutive operations of the same kind share a line. Each declaration
    /// is written as soon as all of its records exist, keeping declaration
    /// order, so parsing the output gives back an equal circuit.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut measured = 0usize;
        let mut next_det = 0usize;
        let mut obs_done = vec![false; self.observables.len()];
        let mut i = 0;
        self.flush_declarations(&mut out, measured, &mut next_det, &mut obs_done);
        while i < self.ops.len() {
            let kind = self.ops[i].kind;
            let mut j = i;
            out.push_str(kind.name());
            while j < self.ops.len() && self.ops[j].kind == kind {
                for q in &self.ops[j].targets {
                    let _ = write!(out, " {q}");
                }
                if kind.is_measurement() {
                    measured += 1;
                }
                j += 1;
                if kind == OpKind::Tick {
                    break;
                }
            }
            out.push('\n');
            i = j;
            self.flush_declarations(&mut out, measured, &mut next_det, &mut obs_done);
        }
        out
    }

    fn flush_declarations(&self, out: &mut String, measured: usize, next_det: &mut usize, obs_done: &mut [bool]) {
        let ready = |p: &RecordParity| p.records.iter().all(|&r| r < measured);
        let write_refs = |out: &mut String, p: &RecordParity| {
            for &r in &p.records {
                let _ = write!(out, " rec[-{}]", measured - r);
            }
            out.push('\n');
        };
        while *next_det < self.detectors.len() && ready(&self.detectors[*next_det]) {
            out.push_str("DETECTOR");
            write_refs(out, &self.detectors[*next_det]);
            *next_det += 1;
        }
        for (k, done) in obs_done.iter_mut().enumerate() {
            if !*done && ready(&self.observables[k]) {
                let _ = write!(out, "OBSERVABLE_INCLUDE({k})");
                write_refs(out, &self.observables[k]);
                *done = true;
            }
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A slot where a single-qubit Pauli fault may be injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaultLocation {
    pub index: usize,
    /// Index into [`Circuit::ops`] of the operation the fault precedes.
    pub op_index: usize,
    pub qubit: u32,
}

/// Lists fault locations in operation order, then target order within an
/// operation.
pub fn enumerate_fault_locations(c: &Circuit) -> Vec<FaultLocation> {
    let mut out = Vec::with_capacity(c.num_fault_locations());
    for (op_index, op) in c.ops.iter().enumerate() {
        if !op.kind.has_fault_locations() {
            continue;
        }
        for &qubit in &op.targets {
            out.push(FaultLocation {
                index: out.len(),
                op_index,
                qubit,
            });
        }
    }
    out
}

/// Incremental construction used by the parser and the generators.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    ops: Vec<Operation>,
    detectors: Vec<RecordParity>,
    observables: Vec<RecordParity>,
    measurements: usize,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends one operation; returns its measurement record index if it measures.
    pub fn push(&mut self, kind: OpKind, targets: &[u32]) -> Result<Option<usize>, CircuitError> {
        self.ops.push(Operation::new(kind, targets)?);
        if kind.is_measurement() {
            self.measurements += 1;
            Ok(Some(self.measurements - 1))
        } else {
            Ok(None)
        }
    }

    /// Applies a single-qubit operation to each qubit in turn.
    pub fn broadcast(&mut self, kind: OpKind, qubits: &[u32]) -> Vec<usize> {
        assert_eq!(kind.arity(), 1);
        qubits
            .iter()
            .filter_map(|&q| self.push(kind, &[q]).expect("arity checked"))
            .collect()
    }

    pub fn cnot(&mut self, control: u32, target: u32) {
        self.push(OpKind::Cnot, &[control, target])
            .expect("generators never repeat a CX target");
    }

    pub fn tick(&mut self) {
        self.ops.push(Operation {
            kind: OpKind::Tick,
            targets: Vec::new(),
        });
    }

    pub fn num_measurements(&self) -> usize {
        self.measurements
    }

    pub fn detector(&mut self, records: Vec<usize>) {
        self.detectors.push(RecordParity { records });
    }

    /// Adds records to observable `index`, creating it (and any lower indices) if needed.
    pub fn observable_include(&mut self, index: usize, records: &[usize]) {
        if self.observables.len() <= index {
            self.observables.resize(index + 1, RecordParity::default());
        }
        self.observables[index].records.extend_from_slice(records);
    }

    pub fn build(self) -> Result<Circuit, CircuitError> {
        Circuit::new(self.ops, self.detectors, self.observables)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_and_reset_have_no_locations() {
        let c = parse_circuit("R 0 1\nTICK\nH 0\nCX 0 1\nI 1\nM 0 1\n").unwrap();
        let locs = enumerate_fault_locations(&c);
        assert_eq!(locs.len(), 6);
        assert_eq!(c.num_fault_locations(), 6);
        assert_eq!(locs[0].op_index, 3);
        assert_eq!((locs[1].qubit, locs[2].qubit), (0, 1));
    }

    #[test]
    fn serialization_groups_runs() {
        let c = parse_circuit("M 0\nM 1\nDETECTOR rec[-2] rec[-1]\nTICK\nTICK\n").unwrap();
        assert_eq!(c.to_text(), "M 0 1\nDETECTOR rec[-2] rec[-1]\nTICK\nTICK\n");
    }

    #[test]
    fn declarations_keep_order() {
        let text = "M 0 1\nDETECTOR rec[-1]\nM 2\nDETECTOR rec[-3]\nOBSERVABLE_INCLUDE(1) rec[-1]\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.detectors()[1].records, vec![0]);
        assert_eq!(parse_circuit(&c.to_text()).unwrap(), c);
        assert_eq!(c.observables().len(), 2);
    }
}
