use std::collections::HashSet;

use super::csc::{CscMatrix, Scalar};
use super::SparseError;

/// Minimum-degree fill-reducing ordering on a structurally symmetric pattern.
///
/// Classic elimination-graph formulation: repeatedly eliminate the vertex of
/// minimum degree, connecting its remaining neighbors into a clique. Ties are
/// broken by the smallest original index, so the result is deterministic.
///
/// Returns `perm` with `perm[k]` = original index eliminated k-th.
pub fn min_degree_order<T: Scalar>(pattern: &CscMatrix<T>) -> Result<Vec<usize>, SparseError> {
    pattern.check_pattern_symmetric()?;
    let n = pattern.n();
    let mut adj: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for j in 0..n {
        for (i, _) in pattern.col(j) {
            if i != j {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }

    let mut eliminated = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = usize::MAX;
        let mut best_deg = usize::MAX;
        for v in 0..n {
            if !eliminated[v] {
                let d = adj[v].len();
                if d < best_deg {
                    best_deg = d;
                    best = v;
                }
            }
        }
        let v = best;
        eliminated[v] = true;
        perm.push(v);
        let neighbors: Vec<usize> = adj[v].iter().copied().collect();
        for &u in &neighbors {
            adj[u].remove(&v);
        }
        for a in 0..neighbors.len() {
            for b in a + 1..neighbors.len() {
                let (u, w) = (neighbors[a], neighbors[b]);
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
        adj[v].clear();
    }
    Ok(perm)
}
