//! Random small Clifford circuits with deterministic detectors, and their
//! fault responses computed by full tableau simulation.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::tableau::{Gate, Tableau};

/// Noiseless runs used to classify a parity as deterministic. A random
/// parity survives all of them with probability `2^-(RUNS-1)`.
const RUNS: u64 = 64;

#[derive(Debug, Clone)]
pub struct RandomCircuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub detectors: Vec<Vec<usize>>,
    pub observables: Vec<Vec<usize>>,
}

/// Pauli index convention: 0 = X, 1 = Y, 2 = Z.
pub type Fault = (usize, u8);

fn qubits(g: Gate) -> Vec<usize> {
    match g {
        Gate::Cx(a, b) => vec![a, b],
        Gate::H(a)
        | Gate::S(a)
        | Gate::X(a)
        | Gate::Y(a)
        | Gate::Z(a)
        | Gate::M(a)
        | Gate::Mr(a)
        | Gate::R(a)
        | Gate::I(a) => vec![a],
    }
}

impl RandomCircuit {
    /// Up to `max_qubits` qubits and `max_ops` gates. Detectors and
    /// observables are drawn from record subsets whose parity is the same in
    /// every noiseless run.
    pub fn generate(rng: &mut impl Rng, max_qubits: usize, max_ops: usize) -> Self {
        let n = rng.gen_range(1..=max_qubits);
        let len = rng.gen_range(1..=max_ops);
        let mut gates = Vec::with_capacity(len + n);
        for _ in 0..len {
            let a = rng.gen_range(0..n);
            let g = match rng.gen_range(0..11) {
                0 | 1 => Gate::H(a),
                2 => Gate::S(a),
                3 | 4 if n > 1 => {
                    let mut b = rng.gen_range(0..n - 1);
                    if b >= a {
                        b += 1;
                    }
                    Gate::Cx(a, b)
                }
                3 | 4 => Gate::H(a),
                5 => [Gate::X(a), Gate::Y(a), Gate::Z(a)][rng.gen_range(0..3)],
                6 | 7 => Gate::M(a),
                8 => Gate::Mr(a),
                9 => Gate::R(a),
                _ => Gate::I(a),
            };
            gates.push(g);
        }
        // Final readout of every qubit makes deterministic parities common.
        gates.extend((0..n).map(Gate::M));
        let mut c = Self {
            num_qubits: n,
            gates,
            detectors: Vec::new(),
            observables: Vec::new(),
        };
        let runs: Vec<Vec<bool>> = (0..RUNS).map(|s| c.run(&[], s)).collect();
        let m = runs[0].len();
        let deterministic = |set: &[usize]| {
            let parity = |r: &Vec<bool>| set.iter().fold(false, |acc, &i| acc ^ r[i]);
            let first = parity(&runs[0]);
            runs.iter().all(|r| parity(r) == first)
        };
        let mut candidates: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
        for _ in 0..3 * m {
            let k = rng.gen_range(2..=3.min(m).max(2));
            let mut set: Vec<usize> = (0..k).map(|_| rng.gen_range(0..m)).collect();
            set.sort_unstable();
            set.dedup();
            candidates.push(set);
        }
        let mut found: Vec<Vec<usize>> = candidates.into_iter().filter(|s| deterministic(s)).collect();
        found.dedup();
        for set in found {
            if c.observables.len() < 2 && rng.gen_bool(0.2) {
                c.observables.push(set);
            } else if c.detectors.len() < 24 {
                c.detectors.push(set);
            }
        }
        c
    }

    /// `(gate index, qubit)` per fault location, gate-major, in target order.
    /// Resets have none.
    pub fn locations(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| !matches!(g, Gate::R(_)))
            .flat_map(|(i, &g)| qubits(g).into_iter().map(move |q| (i, q)))
            .collect()
    }

    /// Measurement record with each fault inserted as a Pauli gate just
    /// before its location's gate.
    pub fn run(&self, faults: &[Fault], seed: u64) -> Vec<bool> {
        let locs = self.locations();
        let mut before: Vec<Vec<Gate>> = vec![Vec::new(); self.gates.len()];
        for &(loc, p) in faults {
            let (gi, q) = locs[loc];
            before[gi].push(match p {
                0 => Gate::X(q),
                1 => Gate::Y(q),
                _ => Gate::Z(q),
            });
        }
        let mut rng = StdRng::seed_from_u64(seed);
        let mut t = Tableau::new(self.num_qubits);
        let mut records = Vec::new();
        for (g, pre) in self.gates.iter().zip(&before) {
            for &f in pre {
                t.apply(f, &mut records, &mut rng);
            }
            t.apply(*g, &mut records, &mut rng);
        }
        records
    }

    /// Detector and observable flips caused by `faults`, relative to the
    /// noiseless circuit.
    pub fn flips(&self, faults: &[Fault]) -> (Vec<bool>, Vec<bool>) {
        let clean = self.run(&[], 0);
        let noisy = self.run(faults, 1);
        let eval = |sets: &[Vec<usize>]| -> Vec<bool> {
            sets.iter()
                .map(|s| s.iter().fold(false, |acc, &i| acc ^ clean[i] ^ noisy[i]))
                .collect()
        };
        (eval(&self.detectors), eval(&self.observables))
    }

    /// The circuit in the line-oriented text format, one gate per line, with
    /// all declarations at the end.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let line = match *g {
                Gate::H(a) => format!("H {a}"),
                Gate::S(a) => format!("S {a}"),
                Gate::X(a) => format!("X {a}"),
                Gate::Y(a) => format!("Y {a}"),
                Gate::Z(a) => format!("Z {a}"),
                Gate::Cx(a, b) => format!("CX {a} {b}"),
                Gate::M(a) => format!("M {a}"),
                Gate::Mr(a) => format!("MR {a}"),
                Gate::R(a) => format!("R {a}"),
                Gate::I(a) => format!("I {a}"),
            };
            out.push_str(&line);
            out.push('\n');
        }
        let m = self
            .gates
            .iter()
            .filter(|g| matches!(g, Gate::M(_) | Gate::Mr(_)))
            .count();
        let refs = |set: &[usize]| -> String { set.iter().map(|&i| format!(" rec[-{}]", m - i)).collect() };
        for d in &self.detectors {
            out.push_str(&format!("DETECTOR{}\n", refs(d)));
        }
        for (k, o) in self.observables.iter().enumerate() {
            out.push_str(&format!("OBSERVABLE_INCLUDE({k}){}\n", refs(o)));
        }
        out
    }
}
