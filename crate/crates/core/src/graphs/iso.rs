//! Brute-force isomorphism test for small graphs.

use super::Graph;
use crate::{Error, Result};

/// Largest graph accepted by [`is_isomorphic`].
pub const ISOMORPHISM_NODE_LIMIT: usize = 12;

/// Backtracking search for an edge-preserving bijection, pruned by degree.
pub fn is_isomorphic(g1: &Graph, g2: &Graph) -> Result<bool> {
    let n = g1.node_count();
    for g in [g1, g2] {
        if g.node_count() > ISOMORPHISM_NODE_LIMIT {
            return Err(Error::Capability(format!(
                "isomorphism oracle is limited to {ISOMORPHISM_NODE_LIMIT} nodes, got {}",
                g.node_count()
            )));
        }
    }
    if n != g2.node_count() || g1.edge_count() != g2.edge_count() {
        return Ok(false);
    }
    let mut d1 = g1.degrees();
    let mut d2 = g2.degrees();
    d1.sort_unstable();
    d2.sort_unstable();
    if d1 != d2 {
        return Ok(false);
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(extend(g1, g2, 0, &mut map, &mut used))
}

fn extend(g1: &Graph, g2: &Graph, v: usize, map: &mut [usize], used: &mut [bool]) -> bool {
    if v == g1.node_count() {
        return true;
    }
    for w in 0..g2.node_count() {
        if used[w] || g1.degree(v) != g2.degree(w) {
            continue;
        }
        let consistent = (0..v).all(|u| g1.has_edge(u, v) == g2.has_edge(map[u], w));
        if !consistent {
            continue;
        }
        map[v] = w;
        used[w] = true;
        if extend(g1, g2, v + 1, map, used) {
            return true;
        }
        used[w] = false;
    }
    map[v] = usize::MAX;
    false
}
