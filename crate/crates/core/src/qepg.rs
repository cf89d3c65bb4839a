//! Quantum error propagation graph.
//!
//! For every fault location and Pauli the [`Qepg`] stores which detectors and
//! observables the single fault flips. Because propagation through Clifford
//! circuits is linear over GF(2), the effect of any fault set is the XOR of
//! its rows.
//!
//! Rows are bit-packed: bit `i < D` is detector `i`, bit `D + k` is
//! observable `k`.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, OpKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i]
    }
}

#[derive(Debug, Error)]
pub enum QepgError {
    #[error("fault location {location} out of range (circuit has {num_locations})")]
    LocationOutOfRange { location: usize, num_locations: usize },
    #[error("fault location {0} appears twice in one fault set")]
    DuplicateLocation(usize),
    #[error("malformed QEPG file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A set of single-qubit Pauli faults at distinct locations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FaultSet {
    entries: Vec<(usize, Pauli)>,
}

impl FaultSet {
    pub fn new(entries: Vec<(usize, Pauli)>) -> Result<Self, QepgError> {
        let mut locs: Vec<usize> = entries.iter().map(|e| e.0).collect();
        locs.sort_unstable();
        if let Some(w) = locs.windows(2).find(|w| w[0] == w[1]) {
            return Err(QepgError::DuplicateLocation(w[0]));
        }
        Ok(Self { entries })
    }

    pub fn single(location: usize, pauli: Pauli) -> Self {
        Self {
            entries: vec![(location, pauli)],
        }
    }

    pub fn entries(&self) -> &[(usize, Pauli)] {
        &self.entries
    }

    pub fn weight(&self) -> usize {
        self.entries.len()
    }
}

/// Fixed-length packed bit vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        iter_ones(&self.words).take_while(|&i| i < self.len)
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

/// Indices of set bits in a word slice, ascending.
pub fn iter_ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            (rest != 0).then(|| {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                wi * 64 + b
            })
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShotOutcome {
    pub syndrome: Bits,
    pub observable_flips: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qepg {
    num_locations: usize,
    num_detectors: usize,
    num_observables: usize,
    words_per_row: usize,
    rows: Vec<u64>,
}

const MAGIC: &[u8; 4] = b"QEPG";
const FORMAT_VERSION: u32 = 1;

impl Qepg {
    /// Compiles by propagating detector/observable sensitivities backwards.
    ///
    /// Walking the circuit in reverse, `sens_x[q]` holds the flips an X error
    /// on `q` at the current point would cause (likewise `sens_z`). A fault
    /// location's rows are read off just before its operation.
    pub fn compile(c: &Circuit) -> Self {
        let d = c.detectors().len();
        let k = c.observables().len();
        let words = (d + k).div_ceil(64).max(1);
        let num_locations = c.num_fault_locations();

        let mut record_sens = vec![0u64; c.num_measurements() * words];
        let mut toggle = |records: &[usize], bit: usize| {
            for &r in records {
                record_sens[r * words + bit / 64] ^= 1 << (bit % 64);
            }
        };
        for (i, det) in c.detectors().iter().enumerate() {
            toggle(&det.records, i);
        }
        for (i, obs) in c.observables().iter().enumerate() {
            toggle(&obs.records, d + i);
        }

        let n = c.num_qubits();
        let mut sx = vec![0u64; n * words];
        let mut sz = vec![0u64; n * words];
        let mut rows = vec![0u64; 3 * num_locations * words];
        let mut next_loc = num_locations;
        let mut next_rec = c.num_measurements();
        let span = |q: u32| q as usize * words..(q as usize + 1) * words;

        for op in c.ops().iter().rev() {
            let t = op.targets();
            match op.kind() {
                OpKind::Tick | OpKind::Idle | OpKind::PauliX | OpKind::PauliY | OpKind::PauliZ => {}
                OpKind::Reset => {
                    sx[span(t[0])].fill(0);
                    sz[span(t[0])].fill(0);
                }
                OpKind::Measure => {
                    next_rec -= 1;
                    let rec = &record_sens[next_rec * words..(next_rec + 1) * words];
                    xor_into(&mut sx[span(t[0])], rec);
                }
                OpKind::MeasureReset => {
                    next_rec -= 1;
                    let rec = &record_sens[next_rec * words..(next_rec + 1) * words];
                    sx[span(t[0])].copy_from_slice(rec);
                    sz[span(t[0])].fill(0);
                }
                OpKind::Hadamard => {
                    for w in span(t[0]) {
                        std::mem::swap(&mut sx[w], &mut sz[w]);
                    }
                }
                OpKind::Phase => {
                    for w in span(t[0]) {
                        sx[w] ^= sz[w];
                    }
                }
                OpKind::Cnot => {
                    let (ctl, tgt) = (t[0] as usize * words, t[1] as usize * words);
                    for w in 0..words {
                        sx[ctl + w] ^= sx[tgt + w];
                        sz[tgt + w] ^= sz[ctl + w];
                    }
                }
            }
            if op.kind().has_fault_locations() {
                next_loc -= t.len();
                for (j, &q) in t.iter().enumerate() {
                    let base = 3 * (next_loc + j) * words;
                    let (x, z) = (&sx[span(q)], &sz[span(q)]);
                    for w in 0..words {
                        rows[base + w] = x[w];
                        rows[base + words + w] = x[w] ^ z[w];
                        rows[base + 2 * words + w] = z[w];
                    }
                }
            }
        }
        debug_assert_eq!(next_loc, 0);
        debug_assert_eq!(next_rec, 0);
        Self {
            num_locations,
            num_detectors: d,
            num_observables: k,
            words_per_row: words,
            rows,
        }
    }

    /// Builds a table directly from rows given as `rows[location][pauli]`
    /// lists of flipped bit indices (detectors, then `D + k` for observables).
    pub fn from_flips(num_detectors: usize, num_observables: usize, rows: &[[Vec<usize>; 3]]) -> Self {
        let words = (num_detectors + num_observables).div_ceil(64).max(1);
        let mut packed = vec![0u64; 3 * rows.len() * words];
        for (loc, paulis) in rows.iter().enumerate() {
            for (p, bits) in paulis.iter().enumerate() {
                for &b in bits {
                    assert!(b < num_detectors + num_observables);
                    packed[(3 * loc + p) * words + b / 64] ^= 1 << (b % 64);
                }
            }
        }
        Self {
            num_locations: rows.len(),
            num_detectors,
            num_observables,
            words_per_row: words,
            rows: packed,
        }
    }

    pub fn num_locations(&self) -> usize {
        self.num_locations
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn num_observables(&self) -> usize {
        self.num_observables
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    pub fn row(&self, location: usize, pauli: Pauli) -> &[u64] {
        let start = (3 * location + pauli.index()) * self.words_per_row;
        &self.rows[start..start + self.words_per_row]
    }

    /// XORs one row into `acc` (length [`Self::words_per_row`]).
    #[inline]
    pub fn xor_row_into(&self, location: usize, pauli: Pauli, acc: &mut [u64]) {
        xor_into(acc, self.row(location, pauli));
    }

    /// Detector indices flipped by a packed row or row combination.
    pub fn detectors_in<'a>(&self, words: &'a [u64]) -> impl Iterator<Item = usize> + 'a {
        let d = self.num_detectors;
        iter_ones(words).take_while(move |&i| i < d)
    }

    /// Observable flips of a packed row as a mask; requires `K <= 64`.
    pub fn observable_mask(&self, words: &[u64]) -> u64 {
        assert!(
            self.num_observables <= 64,
            "observable masks hold at most 64 observables"
        );
        let mut mask = 0u64;
        for k in 0..self.num_observables {
            let b = self.num_detectors + k;
            mask |= (words[b / 64] >> (b % 64) & 1) << k;
        }
        mask
    }

    /// Detector part of a packed row, with observable bits cleared.
    pub fn syndrome_words(&self, words: &[u64]) -> Vec<u64> {
        let n = self.num_detectors.div_ceil(64);
        let mut out = words[..n].to_vec();
        if !self.num_detectors.is_multiple_of(64) {
            out[n - 1] &= (1u64 << (self.num_detectors % 64)) - 1;
        }
        out
    }

    pub fn evaluate(&self, f: &FaultSet) -> Result<ShotOutcome, QepgError> {
        let mut acc = vec![0u64; self.words_per_row];
        for &(loc, p) in f.entries() {
            if loc >= self.num_locations {
                return Err(QepgError::LocationOutOfRange {
                    location: loc,
                    num_locations: self.num_locations,
                });
            }
            self.xor_row_into(loc, p, &mut acc);
        }
        let mut syndrome = Bits::zeros(self.num_detectors);
        for i in self.detectors_in(&acc) {
            syndrome.set(i, true);
        }
        let mut observable_flips = Bits::zeros(self.num_observables);
        for k in 0..self.num_observables {
            let b = self.num_detectors + k;
            observable_flips.set(k, acc[b / 64] >> (b % 64) & 1 == 1);
        }
        Ok(ShotOutcome {
            syndrome,
            observable_flips,
        })
    }

    pub fn evaluate_batch(&self, fs: &[FaultSet]) -> Result<Vec<ShotOutcome>, QepgError> {
        fs.iter().map(|f| self.evaluate(f)).collect()
    }

    /// Writes the versioned binary form: magic, version, `C`, `D`, `K`, then
    /// the `3C` rows as little-endian words.
    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        for n in [self.num_locations, self.num_detectors, self.num_observables] {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        for word in &self.rows {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, QepgError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(QepgError::Format("bad magic".into()));
        }
        let mut v = [0u8; 4];
        r.read_exact(&mut v)?;
        let version = u32::from_le_bytes(v);
        if version != FORMAT_VERSION {
            return Err(QepgError::Format(format!("unsupported version {version}")));
        }
        let mut read_u64 = || -> io::Result<u64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(u64::from_le_bytes(b))
        };
        let c = read_u64()? as usize;
        let d = read_u64()? as usize;
        let k = read_u64()? as usize;
        let words = (d + k).div_ceil(64).max(1);
        let total = 3usize
            .checked_mul(c)
            .and_then(|x| x.checked_mul(words))
            .ok_or_else(|| QepgError::Format("header sizes overflow".into()))?;
        let mut rows = Vec::with_capacity(total);
        for _ in 0..total {
            rows.push(read_u64()?);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(QepgError::Format("trailing bytes".into()));
        }
        Ok(Self {
            num_locations: c,
            num_detectors: d,
            num_observables: k,
            words_per_row: words,
            rows,
        })
    }
}

#[inline]
fn xor_into(acc: &mut [u64], row: &[u64]) {
    for (a, r) in acc.iter_mut().zip(row) {
        *a ^= r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    #[test]
    fn measurement_flip_and_reset() {
        let c = parse_circuit("R 0\nX 0\nMR 0\nM 0\nDETECTOR rec[-2]\nDETECTOR rec[-1]").unwrap();
        let g = Qepg::compile(&c);
        assert_eq!(g.num_locations(), 3);
        // X gate location: an X before it flips the first record only.
        assert_eq!(g.detectors_in(g.row(0, Pauli::X)).collect::<Vec<_>>(), vec![0]);
        assert_eq!(g.detectors_in(g.row(0, Pauli::Z)).count(), 0);
        assert_eq!(g.detectors_in(g.row(2, Pauli::Y)).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn hadamard_and_phase() {
        let c = parse_circuit("R 0\nH 0\nS 0\nH 0\nM 0\nOBSERVABLE_INCLUDE(0) rec[-1]").unwrap();
        let g = Qepg::compile(&c);
        // Before the final H only Z errors flip the measurement.
        assert_eq!(g.observable_mask(g.row(2, Pauli::Z)), 1);
        assert_eq!(g.observable_mask(g.row(2, Pauli::X)), 0);
        // Before S: Z -> Z -> H -> X flips; X -> Y -> H -> Y flips too.
        assert_eq!(g.observable_mask(g.row(1, Pauli::Z)), 1);
        assert_eq!(g.observable_mask(g.row(1, Pauli::X)), 1);
    }

    #[test]
    fn empty_fault_set_and_duplicates() {
        let c = parse_circuit("R 0\nH 0\nM 0\nDETECTOR rec[-1]").unwrap();
        let g = Qepg::compile(&c);
        let out = g.evaluate(&FaultSet::new(vec![]).unwrap()).unwrap();
        assert_eq!(out.syndrome.count_ones(), 0);
        assert!(matches!(
            FaultSet::new(vec![(1, Pauli::X), (1, Pauli::Z)]),
            Err(QepgError::DuplicateLocation(1))
        ));
        assert!(matches!(
            g.evaluate(&FaultSet::single(7, Pauli::X)),
            Err(QepgError::LocationOutOfRange { location: 7, .. })
        ));
    }

    #[test]
    fn dump_round_trip() {
        let c = parse_circuit("R 0 1\nH 0\nCX 0 1\nM 0 1\nDETECTOR rec[-1] rec[-2]\nOBSERVABLE_INCLUDE(0) rec[-1]")
            .unwrap();
        let g = Qepg::compile(&c);
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        assert_eq!(Qepg::read_from(buf.as_slice()).unwrap(), g);
        buf.push(0);
        assert!(Qepg::read_from(buf.as_slice()).is_err());
    }
}
