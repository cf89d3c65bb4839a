use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::{build_detector_graph, max_weight_matching, Decoder, DecoderError, DetectorGraph};
use crate::qepg::{iter_ones, Qepg};

/// What to do when a component has more defects than the bitmask DP handles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LargeDefectStrategy {
    /// Exact matching with the blossom algorithm.
    Blossom,
    /// Repeatedly take the cheapest remaining pair or boundary match.
    Greedy,
    /// Return [`DecoderError::TooManyDefects`].
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingConfig {
    /// Largest defect count solved by the bitmask DP.
    pub dp_limit: usize,
    pub large: LargeDefectStrategy,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        Self {
            dp_limit: 10,
            large: LargeDefectStrategy::Blossom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Trivial,
    Dp,
    Blossom,
    Greedy,
}

/// Full result of one matching decode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingOutcome {
    pub observables: u64,
    pub weight: f64,
    /// Matched pairs `(a, b)` of detector indices; `b == num_detectors` is the boundary.
    pub pairs: Vec<(usize, usize)>,
    /// Most heuristic method used across components.
    pub method: Method,
}

/// Minimum-weight perfect matching decoder over a [`DetectorGraph`].
///
/// Shortest-path distances and their observable masks between all detectors
/// (and the boundary) are precomputed. Components of the graph that meet only
/// at the boundary are matched independently.
#[derive(Debug)]
pub struct MatchingDecoder {
    graph: DetectorGraph,
    config: MatchingConfig,
    n: usize,
    /// `dist[i * (n + 1) + j]`, with `j == n` the boundary.
    dist: Vec<f64>,
    obs: Vec<u64>,
    component: Vec<u32>,
    greedy_decodes: AtomicU64,
}

impl MatchingDecoder {
    pub fn from_qepg(g: &Qepg, config: MatchingConfig) -> Result<Self, DecoderError> {
        Ok(Self::new(build_detector_graph(g)?, config))
    }

    pub fn new(graph: DetectorGraph, config: MatchingConfig) -> Self {
        let n = graph.num_detectors();
        let mut adj: Vec<Vec<(usize, f64, u64)>> = vec![Vec::new(); n + 1];
        for e in graph.edges() {
            adj[e.u].push((e.v, e.weight, e.observables));
            adj[e.v].push((e.u, e.weight, e.observables));
        }
        let mut dist = vec![f64::INFINITY; n * (n + 1)];
        let mut obs = vec![0u64; n * (n + 1)];
        for src in 0..n {
            let row = src * (n + 1)..(src + 1) * (n + 1);
            dijkstra(&adj, src, &mut dist[row.clone()], &mut obs[row]);
        }

        let mut component = vec![u32::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if component[start] != u32::MAX {
                continue;
            }
            component[start] = next;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &(v, _, _) in &adj[u] {
                    if v < n && component[v] == u32::MAX {
                        component[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        Self {
            graph,
            config,
            n,
            dist,
            obs,
            component,
            greedy_decodes: AtomicU64::new(0),
        }
    }

    pub fn graph(&self) -> &DetectorGraph {
        &self.graph
    }

    pub fn config(&self) -> MatchingConfig {
        self.config
    }

    /// Number of decodes so far that used the greedy fallback.
    pub fn greedy_decodes(&self) -> u64 {
        self.greedy_decodes.load(Ordering::Relaxed)
    }

    /// Shortest-path length between detectors, `b == num_detectors` meaning the boundary.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a * (self.n + 1) + b]
    }

    fn path_obs(&self, a: usize, b: usize) -> u64 {
        self.obs[a * (self.n + 1) + b]
    }

    pub fn decode_mwpm(&self, syndrome: &[u64]) -> Result<MatchingOutcome, DecoderError> {
        let n = self.n;
        let mut defects: Vec<usize> = iter_ones(syndrome).take_while(|&i| i < n).collect();
        let mut out = MatchingOutcome {
            observables: 0,
            weight: 0.0,
            pairs: Vec::new(),
            method: Method::Trivial,
        };
        defects.sort_by_key(|&d| (self.component[d], d));
        let mut start = 0;
        while start < defects.len() {
            let c = self.component[defects[start]];
            let end = start + defects[start..].iter().take_while(|&&d| self.component[d] == c).count();
            self.match_group(&defects[start..end], &mut out)?;
            start = end;
        }
        out.pairs.sort_unstable();
        Ok(out)
    }

    fn match_group(&self, defects: &[usize], out: &mut MatchingOutcome) -> Result<(), DecoderError> {
        let m = defects.len();
        let bnd = self.n;
        let pairs: Vec<(usize, usize)> = match m {
            1 => vec![(0, usize::MAX)],
            2 => {
                let (a, b) = (defects[0], defects[1]);
                if self.distance(a, b) < self.distance(a, bnd) + self.distance(b, bnd) {
                    vec![(0, 1)]
                } else {
                    vec![(0, usize::MAX), (1, usize::MAX)]
                }
            }
            _ if m <= self.config.dp_limit => {
                out.method = out.method.max_with(Method::Dp);
                self.match_dp(defects)
            }
            _ => match self.config.large {
                LargeDefectStrategy::Blossom => {
                    out.method = out.method.max_with(Method::Blossom);
                    self.match_blossom(defects)
                }
                LargeDefectStrategy::Greedy => {
                    out.method = out.method.max_with(Method::Greedy);
                    self.greedy_decodes.fetch_add(1, Ordering::Relaxed);
                    self.match_greedy(defects)
                }
                LargeDefectStrategy::Fail => {
                    return Err(DecoderError::TooManyDefects {
                        defects: m,
                        limit: self.config.dp_limit,
                    })
                }
            },
        };
        for (i, j) in pairs {
            let a = defects[i];
            let b = if j == usize::MAX { bnd } else { defects[j] };
            out.weight += self.distance(a, b);
            out.observables ^= self.path_obs(a, b);
            out.pairs.push((a, b));
        }
        Ok(())
    }

    /// Exact matching by DP over subsets: the lowest unmatched defect either
    /// goes to the boundary or pairs with a later defect. Ties keep the first
    /// option in that order.
    fn match_dp(&self, defects: &[usize]) -> Vec<(usize, usize)> {
        let m = defects.len();
        let bnd = self.n;
        let full = (1usize << m) - 1;
        let mut cost = vec![f64::INFINITY; 1 << m];
        let mut choice = vec![u8::MAX; 1 << m];
        cost[0] = 0.0;
        for mask in 1..=full {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            let mut best = cost[rest] + self.distance(defects[i], bnd);
            let mut pick = u8::MAX;
            let mut others = rest;
            while others != 0 {
                let j = others.trailing_zeros() as usize;
                others &= others - 1;
                let c = cost[rest & !(1 << j)] + self.distance(defects[i], defects[j]);
                if c < best {
                    best = c;
                    pick = j as u8;
                }
            }
            cost[mask] = best;
            choice[mask] = pick;
        }
        let mut pairs = Vec::with_capacity(m);
        let mut mask = full;
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            match choice[mask] {
                u8::MAX => {
                    pairs.push((i, usize::MAX));
                    mask &= !(1 << i);
                }
                j => {
                    pairs.push((i, j as usize));
                    mask &= !(1 << i) & !(1 << j);
                }
            }
        }
        pairs
    }

    /// Exact matching via maximum-weight perfect matching on the defects plus
    /// one boundary copy per defect. Copies are joined to each other at zero
    /// cost so unused copies can pair off.
    fn match_blossom(&self, defects: &[usize]) -> Vec<(usize, usize)> {
        const SCALE: f64 = 1e6;
        let m = defects.len();
        let bnd = self.n;
        let mut costs: Vec<(usize, usize, i64)> = Vec::with_capacity(m * m);
        let to_int = |d: f64| {
            if d.is_finite() {
                (d * SCALE).round() as i64
            } else {
                i64::MAX / 4
            }
        };
        for i in 0..m {
            costs.push((i, m + i, to_int(self.distance(defects[i], bnd))));
            for j in i + 1..m {
                let d = self.distance(defects[i], defects[j]);
                if d.is_finite() {
                    costs.push((i, j, to_int(d)));
                }
                costs.push((m + i, m + j, 0));
            }
        }
        let top = costs
            .iter()
            .map(|e| e.2)
            .filter(|&c| c < i64::MAX / 4)
            .max()
            .unwrap_or(0)
            + 1;
        let edges: Vec<(usize, usize, i64)> = costs.iter().map(|&(i, j, c)| (i, j, top - c.min(top))).collect();
        let mate = max_weight_matching(&edges, true);
        let mut pairs = Vec::with_capacity(m);
        for (i, &mi) in mate.iter().enumerate().take(m) {
            match mi {
                Some(j) if j < m => {
                    if i < j {
                        pairs.push((i, j));
                    }
                }
                Some(j) => {
                    debug_assert_eq!(j, m + i);
                    pairs.push((i, usize::MAX));
                }
                None => unreachable!("a perfect matching always exists"),
            }
        }
        pairs
    }

    fn match_greedy(&self, defects: &[usize]) -> Vec<(usize, usize)> {
        let m = defects.len();
        let bnd = self.n;
        let mut options: Vec<(f64, usize, usize)> = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            options.push((self.distance(defects[i], bnd), i, usize::MAX));
            for j in i + 1..m {
                options.push((self.distance(defects[i], defects[j]), i, j));
            }
        }
        options.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut used = vec![false; m];
        let mut pairs = Vec::new();
        for (_, i, j) in options {
            if used[i] || (j != usize::MAX && used[j]) {
                continue;
            }
            used[i] = true;
            if j != usize::MAX {
                used[j] = true;
            }
            pairs.push((i, j));
        }
        pairs
    }
}

impl Method {
    fn max_with(self, other: Method) -> Method {
        let rank = |m: Method| match m {
            Method::Trivial => 0,
            Method::Dp => 1,
            Method::Blossom => 2,
            Method::Greedy => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

impl Decoder for MatchingDecoder {
    fn num_detectors(&self) -> usize {
        self.n
    }

    fn decode(&self, syndrome: &[u64]) -> Result<u64, DecoderError> {
        Ok(self.decode_mwpm(syndrome)?.observables)
    }
}

/// Single-source shortest paths; also accumulates the XOR of observable masks
/// along the chosen path. Weights must be positive.
fn dijkstra(adj: &[Vec<(usize, f64, u64)>], src: usize, dist: &mut [f64], obs: &mut [u64]) {
    let mut done = vec![false; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((0f64.to_bits(), src)));
    while let Some(Reverse((bits, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        let du = f64::from_bits(bits);
        for &(v, w, o) in &adj[u] {
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                obs[v] = obs[u] ^ o;
                heap.push(Reverse((nd.to_bits(), v)));
            }
        }
    }
}
