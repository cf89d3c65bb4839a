//! Memory-experiment generators for the repetition and rotated surface codes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Circuit, CircuitBuilder, OpKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeFamily {
    Repetition,
    Surface,
}

impl std::str::FromStr for CodeFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "repetition" | "rep" => Ok(CodeFamily::Repetition),
            "surface" => Ok(CodeFamily::Surface),
            other => Err(format!("unknown code family `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub family: CodeFamily,
    pub distance: u32,
    pub rounds: u32,
}

impl CodeSpec {
    /// Default round count: `3d` for the surface code, a single round for the
    /// repetition code.
    pub fn new(family: CodeFamily, distance: u32) -> Self {
        let rounds = match family {
            CodeFamily::Surface => 3 * distance,
            CodeFamily::Repetition => 1,
        };
        Self {
            family,
            distance,
            rounds,
        }
    }

    pub fn with_rounds(mut self, rounds: u32) -> Self {
        self.rounds = rounds;
        self
    }

    /// Number of always-correctable faults, `(d-1)/2`.
    pub fn t(&self) -> u32 {
        (self.distance - 1) / 2
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("unsupported distance {0}: must be odd and at least 3")]
    UnsupportedDistance(u32),
    #[error("at least one round of stabilizer measurement is required")]
    ZeroRounds,
}

pub fn generate_code(spec: CodeSpec) -> Result<Circuit, GenerateError> {
    if spec.distance < 3 || spec.distance.is_multiple_of(2) {
        return Err(GenerateError::UnsupportedDistance(spec.distance));
    }
    if spec.rounds == 0 {
        return Err(GenerateError::ZeroRounds);
    }
    let circuit = match spec.family {
        CodeFamily::Repetition => repetition(spec.distance, spec.rounds),
        CodeFamily::Surface => surface(spec.distance, spec.rounds),
    };
    Ok(circuit.build().expect("generated record references are valid"))
}

/// Bit-flip repetition code. Data qubits `0..d`, ancilla `d+i` checks data
/// `i` and `i+1`. The logical observable is the final measurement of data
/// qubit 0; no other data qubit is read out.
///
/// Each round couples every ancilla first to its even-indexed data neighbour,
/// then to its odd-indexed one; the two odd-neighbour couplings of a shared
/// data qubit are split into separate layers. Intermediate rounds use
/// measure-and-reset, the final round a plain measurement.
fn repetition(d: u32, rounds: u32) -> CircuitBuilder {
    let ancillas: Vec<u32> = (0..d - 1).map(|i| d + i).collect();
    let even_neighbour = |i: u32| if i.is_multiple_of(2) { i } else { i + 1 };
    let odd_neighbour = |i: u32| if i.is_multiple_of(2) { i + 1 } else { i };

    let mut b = CircuitBuilder::new();
    b.broadcast(OpKind::Reset, &(0..2 * d - 1).collect::<Vec<_>>());
    b.tick();
    let mut previous: Option<Vec<usize>> = None;
    for round in 0..rounds {
        for (i, &a) in ancillas.iter().enumerate() {
            b.cnot(even_neighbour(i as u32), a);
        }
        for parity in [0, 1] {
            b.tick();
            for (i, &a) in ancillas.iter().enumerate() {
                if i % 2 == parity {
                    b.cnot(odd_neighbour(i as u32), a);
                }
            }
        }
        b.tick();
        let kind = if round + 1 == rounds {
            OpKind::Measure
        } else {
            OpKind::MeasureReset
        };
        let recs = b.broadcast(kind, &ancillas);
        for (k, &r) in recs.iter().enumerate() {
            match &previous {
                None => b.detector(vec![r]),
                Some(prev) => b.detector(vec![prev[k], r]),
            }
        }
        previous = Some(recs);
        if round + 1 < rounds {
            b.tick();
        }
    }
    let obs = b.broadcast(OpKind::Measure, &[0]);
    b.observable_include(0, &obs);
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basis {
    X,
    Z,
}

struct Plaquette {
    qubit: u32,
    basis: Basis,
    /// Data neighbours in the order NW, NE, SW, SE (`None` off the lattice).
    corners: [Option<u32>; 4],
}

/// Plaquettes of the rotated surface code on a `d x d` data grid.
///
/// Plaquette `(i, j)` for `i, j` in `0..=d` touches data `(i-1, j-1)`,
/// `(i-1, j)`, `(i, j-1)`, `(i, j)`. It is X-type when `i + j` is odd. The top
/// and bottom edges keep only X-type plaquettes, the left and right edges only
/// Z-type ones, so the Z logical runs along a row.
fn plaquettes(d: u32) -> Vec<Plaquette> {
    let data = |r: i64, c: i64| -> Option<u32> {
        (0..d as i64)
            .contains(&r)
            .then_some(())
            .filter(|_| (0..d as i64).contains(&c))
            .map(|_| (r * d as i64 + c) as u32)
    };
    let mut out = Vec::new();
    for i in 0..=d {
        for j in 0..=d {
            let basis = if (i + j) % 2 == 1 { Basis::X } else { Basis::Z };
            let row_edge = i == 0 || i == d;
            let col_edge = j == 0 || j == d;
            if (row_edge && basis == Basis::Z) || (col_edge && basis == Basis::X) {
                continue;
            }
            let (i, j) = (i as i64, j as i64);
            out.push(Plaquette {
                qubit: d * d + out.len() as u32,
                basis,
                corners: [data(i - 1, j - 1), data(i - 1, j), data(i, j - 1), data(i, j)],
            });
        }
    }
    out
}

/// Rotated surface code Z-memory experiment on `2d^2 - 1` qubits.
///
/// Data qubit `(r, c)` has index `r*d + c`; ancillas follow in plaquette scan
/// order. X-type ancillas are the CX control and visit corners NW, NE, SW,
/// SE; Z-type ancillas are the target and visit NW, SW, NE, SE. Both orders
/// leave hook errors perpendicular to the logical operator they could damage.
fn surface(d: u32, rounds: u32) -> CircuitBuilder {
    const X_ORDER: [usize; 4] = [0, 1, 2, 3];
    const Z_ORDER: [usize; 4] = [0, 2, 1, 3];
    let plaqs = plaquettes(d);
    let x_anc: Vec<u32> = plaqs.iter().filter(|p| p.basis == Basis::X).map(|p| p.qubit).collect();
    let all_anc: Vec<u32> = plaqs.iter().map(|p| p.qubit).collect();
    let data: Vec<u32> = (0..d * d).collect();

    let mut b = CircuitBuilder::new();
    b.broadcast(OpKind::Reset, &(0..2 * d * d - 1).collect::<Vec<_>>());
    b.tick();
    let mut previous: Option<Vec<usize>> = None;
    for _ in 0..rounds {
        b.broadcast(OpKind::Hadamard, &x_anc);
        b.tick();
        for step in 0..4 {
            for p in &plaqs {
                let corner = match p.basis {
                    Basis::X => p.corners[X_ORDER[step]],
                    Basis::Z => p.corners[Z_ORDER[step]],
                };
                if let Some(q) = corner {
                    match p.basis {
                        Basis::X => b.cnot(p.qubit, q),
                        Basis::Z => b.cnot(q, p.qubit),
                    }
                }
            }
            b.tick();
        }
        b.broadcast(OpKind::Hadamard, &x_anc);
        b.tick();
        let recs = b.broadcast(OpKind::MeasureReset, &all_anc);
        for (k, p) in plaqs.iter().enumerate() {
            match &previous {
                None if p.basis == Basis::Z => b.detector(vec![recs[k]]),
                None => {}
                Some(prev) => b.detector(vec![prev[k], recs[k]]),
            }
        }
        previous = Some(recs);
        b.tick();
    }
    let final_recs = b.broadcast(OpKind::Measure, &data);
    let last = previous.expect("at least one round");
    for (k, p) in plaqs.iter().enumerate() {
        if p.basis == Basis::Z {
            let mut recs: Vec<usize> = p.corners.iter().flatten().map(|&q| final_recs[q as usize]).collect();
            recs.push(last[k]);
            b.detector(recs);
        }
    }
    let logical: Vec<usize> = (0..d as usize).map(|c| final_recs[c]).collect();
    b.observable_include(0, &logical);
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plaquette_counts() {
        for d in [3u32, 5, 7, 9] {
            let p = plaquettes(d);
            assert_eq!(p.len() as u32, d * d - 1);
            let x = p.iter().filter(|p| p.basis == Basis::X).count() as u32;
            assert_eq!(x, (d * d - 1) / 2);
        }
    }

    #[test]
    fn z_logical_commutes_with_x_plaquettes() {
        for d in [3u32, 5, 7] {
            for p in plaquettes(d).iter().filter(|p| p.basis == Basis::X) {
                let overlap = p.corners.iter().flatten().filter(|&&q| q < d).count();
                assert_eq!(overlap % 2, 0);
            }
        }
    }

    #[test]
    fn rejects_even_or_small_distance() {
        for d in [0, 1, 2, 4] {
            let spec = CodeSpec::new(CodeFamily::Surface, d).with_rounds(1);
            assert_eq!(generate_code(spec), Err(GenerateError::UnsupportedDistance(d)));
        }
        let spec = CodeSpec::new(CodeFamily::Repetition, 3).with_rounds(0);
        assert_eq!(generate_code(spec), Err(GenerateError::ZeroRounds));
    }
}
