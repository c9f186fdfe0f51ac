//! Two non-isomorphic graphs with identical local structure.
//!
//! `G1` is two triangles joined by a bridge, `G2` is a 2×3 ladder. In both,
//! four border nodes have degree 2 (one degree-3 neighbor, one degree-2
//! neighbor) and two center nodes have degree 3 (two degree-2 neighbors, one
//! degree-3 neighbor).

use serde::{Deserialize, Serialize};

use super::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeClass {
    Border,
    Center,
}

const G1_EDGES: [(usize, usize); 7] = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (1, 3)];
const G2_EDGES: [(usize, usize); 7] = [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)];

/// Returns `(G1, G2)`.
pub fn locally_equivalent_pair() -> (Graph, Graph) {
    (
        Graph::new(6, G1_EDGES).expect("static graph"),
        Graph::new(6, G2_EDGES).expect("static graph"),
    )
}

/// Unit-disk coordinates of the pair in units of the nearest-neighbor
/// distance: `G1` on a triangular lattice, `G2` on a square lattice.
/// Edges are exactly the pairs at distance 1; every other pair is at least
/// √2 apart.
pub fn locally_equivalent_pair_positions() -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let h = 3f64.sqrt() / 2.0;
    let g1 = vec![[0.0, 0.0], [1.0, 0.0], [0.5, h], [2.0, 0.0], [3.0, 0.0], [2.5, h]];
    let g2 = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0]];
    (g1, g2)
}

/// Degree-3 nodes are centers, all others border nodes.
pub fn node_classes(g: &Graph) -> Vec<NodeClass> {
    (0..g.node_count())
        .map(|v| {
            if g.degree(v) == 3 {
                NodeClass::Center
            } else {
                NodeClass::Border
            }
        })
        .collect()
}
