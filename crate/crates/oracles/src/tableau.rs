//! Dense stabilizer tableau in the CHP layout: rows `0..n` are destabilizers,
//! rows `n..2n` stabilizers, plus one scratch row.

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cx(usize, usize),
    /// Z-basis measurement, appends one record.
    M(usize),
    /// Measure then reset to |0>, appends one record.
    Mr(usize),
    R(usize),
    I(usize),
}

#[derive(Debug, Clone)]
pub struct Tableau {
    n: usize,
    x: Vec<Vec<bool>>,
    z: Vec<Vec<bool>>,
    r: Vec<bool>,
}

impl Tableau {
    /// All qubits in |0>.
    pub fn new(n: usize) -> Self {
        let mut x = vec![vec![false; n]; 2 * n + 1];
        let mut z = vec![vec![false; n]; 2 * n + 1];
        for i in 0..n {
            x[i][i] = true;
            z[n + i][i] = true;
        }
        Self {
            n,
            x,
            z,
            r: vec![false; 2 * n + 1],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn h(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a] && self.z[i][a];
            std::mem::swap(&mut self.x[i][a], &mut self.z[i][a]);
        }
    }

    pub fn s(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a] && self.z[i][a];
            self.z[i][a] ^= self.x[i][a];
        }
    }

    pub fn cx(&mut self, a: usize, b: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a] && self.z[i][b] && (self.x[i][b] ^ self.z[i][a] ^ true);
            self.x[i][b] ^= self.x[i][a];
            self.z[i][a] ^= self.z[i][b];
        }
    }

    /// Conjugation by X flips the sign of every generator with a Z component.
    pub fn x(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.z[i][a];
        }
    }

    pub fn z(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a];
        }
    }

    pub fn y(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a] ^ self.z[i][a];
        }
    }

    fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
        match (x1, z1) {
            (false, false) => 0,
            (true, true) => z2 as i32 - x2 as i32,
            (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
            (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
        }
    }

    /// Row `h` becomes row `i` times row `h`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let mut sum = 2 * self.r[h] as i32 + 2 * self.r[i] as i32;
        for j in 0..self.n {
            sum += Self::g(self.x[i][j], self.z[i][j], self.x[h][j], self.z[h][j]);
        }
        self.r[h] = sum.rem_euclid(4) == 2;
        for j in 0..self.n {
            let (xi, zi) = (self.x[i][j], self.z[i][j]);
            self.x[h][j] ^= xi;
            self.z[h][j] ^= zi;
        }
    }

    /// True when a Z measurement of `a` has a deterministic outcome.
    pub fn is_deterministic(&self, a: usize) -> bool {
        (self.n..2 * self.n).all(|p| !self.x[p][a])
    }

    /// Z-basis measurement; random outcomes come from `rng`.
    pub fn measure(&mut self, a: usize, rng: &mut impl Rng) -> bool {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&p| self.x[p][a]) {
            for i in 0..2 * n {
                if i != p && self.x[i][a] {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.r[p - n] = self.r[p];
            self.x[p].iter_mut().for_each(|v| *v = false);
            self.z[p].iter_mut().for_each(|v| *v = false);
            self.z[p][a] = true;
            let outcome = rng.gen::<bool>();
            self.r[p] = outcome;
            outcome
        } else {
            let scratch = 2 * n;
            self.x[scratch].iter_mut().for_each(|v| *v = false);
            self.z[scratch].iter_mut().for_each(|v| *v = false);
            self.r[scratch] = false;
            for i in 0..n {
                if self.x[i][a] {
                    self.rowsum(scratch, i + n);
                }
            }
            self.r[scratch]
        }
    }

    pub fn reset(&mut self, a: usize, rng: &mut impl Rng) {
        if self.measure(a, rng) {
            self.x(a);
        }
    }

    pub fn apply(&mut self, gate: Gate, records: &mut Vec<bool>, rng: &mut impl Rng) {
        match gate {
            Gate::H(a) => self.h(a),
            Gate::S(a) => self.s(a),
            Gate::X(a) => self.x(a),
            Gate::Y(a) => self.y(a),
            Gate::Z(a) => self.z(a),
            Gate::Cx(a, b) => self.cx(a, b),
            Gate::M(a) => records.push(self.measure(a, rng)),
            Gate::Mr(a) => {
                let m = self.measure(a, rng);
                records.push(m);
                if m {
                    self.x(a);
                }
            }
            Gate::R(a) => self.reset(a, rng),
            Gate::I(_) => {}
        }
    }
}

/// Runs `gates` from |0...0> and returns the measurement record.
pub fn simulate(n: usize, gates: &[Gate], rng: &mut impl Rng) -> Vec<bool> {
    let mut t = Tableau::new(n);
    let mut records = Vec::new();
    for &g in gates {
        t.apply(g, &mut records, rng);
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn bell_pair_parity_is_deterministic() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..20 {
            let rec = simulate(2, &[Gate::H(0), Gate::Cx(0, 1), Gate::M(0), Gate::M(1)], &mut rng);
            assert_eq!(rec[0], rec[1]);
        }
    }

    #[test]
    fn paulis_flip_z_outcomes() {
        let mut rng = StdRng::seed_from_u64(2);
        assert_eq!(simulate(1, &[Gate::X(0), Gate::M(0)], &mut rng), vec![true]);
        assert_eq!(simulate(1, &[Gate::Y(0), Gate::M(0)], &mut rng), vec![true]);
        assert_eq!(simulate(1, &[Gate::Z(0), Gate::M(0)], &mut rng), vec![false]);
        // HZH = X, and S^2 = Z.
        let hzh = [Gate::H(0), Gate::S(0), Gate::S(0), Gate::H(0), Gate::M(0)];
        assert_eq!(simulate(1, &hzh, &mut rng), vec![true]);
        let reset = [Gate::X(0), Gate::Mr(0), Gate::M(0)];
        assert_eq!(simulate(1, &reset, &mut rng), vec![true, false]);
    }
}
