//! Exhaustive minimum-weight matching with an optional boundary.

/// Minimum total cost of pairing up `n` defects, where each defect is either
/// matched to another (`pair[i][j]`) or sent to the boundary (`boundary[i]`).
/// Exponential; intended for at most a dozen defects.
pub fn min_weight_matching(pair: &[Vec<f64>], boundary: &[f64]) -> f64 {
    let n = boundary.len();
    assert!(n <= 16, "too many defects for exhaustive matching");
    fn go(used: &mut [bool], pair: &[Vec<f64>], boundary: &[f64]) -> f64 {
        let Some(i) = used.iter().position(|u| !u) else {
            return 0.0;
        };
        used[i] = true;
        let mut best = boundary[i] + go(used, pair, boundary);
        for j in i + 1..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(pair[i][j] + go(used, pair, boundary));
                used[j] = false;
            }
        }
        used[i] = false;
        best
    }
    go(&mut vec![false; n], pair, boundary)
}

/// Maximum total weight over all matchings of a small general graph.
pub fn max_weight_matching_value(num_vertices: usize, edges: &[(usize, usize, i64)]) -> i64 {
    fn go(v: usize, used: &mut [bool], adj: &[Vec<(usize, i64)>]) -> i64 {
        if v == used.len() {
            return 0;
        }
        if used[v] {
            return go(v + 1, used, adj);
        }
        let mut best = go(v + 1, used, adj);
        used[v] = true;
        for &(u, w) in &adj[v] {
            if !used[u] {
                used[u] = true;
                best = best.max(w + go(v + 1, used, adj));
                used[u] = false;
            }
        }
        used[v] = false;
        best
    }
    let mut adj = vec![Vec::new(); num_vertices];
    for &(a, b, w) in edges {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    go(0, &mut vec![false; num_vertices], &adj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefers_cheaper_option() {
        let pair = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(min_weight_matching(&pair, &[5.0, 5.0]), 1.0);
        assert_eq!(min_weight_matching(&pair, &[0.2, 0.3]), 0.5);
        assert_eq!(min_weight_matching(&[], &[]), 0.0);
    }

    #[test]
    fn small_general_graph() {
        // Triangle plus pendant: best is (0,1) + (2,3).
        let edges = [(0, 1, 5), (1, 2, 6), (0, 2, 4), (2, 3, 3)];
        assert_eq!(max_weight_matching_value(4, &edges), 8);
    }
}
