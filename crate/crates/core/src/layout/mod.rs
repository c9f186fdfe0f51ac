//! Unit-disk layouts for graphs and their batching onto shared triangular
//! trap patterns.

mod cycles;
mod fr;
mod lattice;
mod optimize;
mod slm;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graphs::Graph;
use crate::{Error, Result};

pub use cycles::{
    cluster_dataset, count_cycles, kmeans, structural_features, structural_similarity,
    SimilarityWeights,
};
pub use fr::fruchterman_reingold;
pub use lattice::{LatticePoint, NEIGHBOR_OFFSETS};
pub use optimize::{optimize_ud_layout, smooth_objective, LayoutConfig};
pub use slm::{batch_to_slm, induced_lattice_graph, SlmConfig, SlmPattern};

/// Default nearest-neighbor distance in µm.
pub const DEFAULT_NN_DISTANCE_UM: f64 = 5.3;
/// Default hardware minimum distance between atoms in µm.
pub const DEFAULT_MIN_DISTANCE_UM: f64 = 4.0;

/// One 2-D position per node, in µm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub positions: Vec<[f64; 2]>,
}

impl Layout {
    pub fn new(positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("layout coordinates must be finite"));
        }
        Ok(Layout { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.positions[a], self.positions[b]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    /// Smallest pairwise distance, `+∞` for fewer than two nodes.
    pub fn min_distance(&self) -> f64 {
        let n = self.len();
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in a + 1..n {
                best = best.min(self.distance(a, b));
            }
        }
        best
    }

    pub fn scaled(&self, factor: f64) -> Layout {
        Layout {
            positions: self
                .positions
                .iter()
                .map(|p| [p[0] * factor, p[1] * factor])
                .collect(),
        }
    }

    pub fn centered(&self) -> Layout {
        let n = self.len().max(1) as f64;
        let cx = self.positions.iter().map(|p| p[0]).sum::<f64>() / n;
        let cy = self.positions.iter().map(|p| p[1]).sum::<f64>() / n;
        Layout {
            positions: self.positions.iter().map(|p| [p[0] - cx, p[1] - cy]).collect(),
        }
    }

    /// Median length over the given edges, `None` without edges.
    pub fn median_edge_length(&self, g: &Graph) -> Option<f64> {
        let mut lengths: Vec<f64> = g.edges().iter().map(|&(a, b)| self.distance(a, b)).collect();
        if lengths.is_empty() {
            return None;
        }
        lengths.sort_by(f64::total_cmp);
        let m = lengths.len();
        Some(if m % 2 == 1 {
            lengths[m / 2]
        } else {
            0.5 * (lengths[m / 2 - 1] + lengths[m / 2])
        })
    }

    /// Rescales so the median edge has length `target`, then enlarges further
    /// if needed so no pair is closer than `floor`. Both operations leave the
    /// interaction ratio unchanged.
    pub fn normalized(&self, g: &Graph, target: f64, floor: f64) -> Result<Layout> {
        let min = self.min_distance();
        if min <= 0.0 {
            return Err(Error::Domain("layout has coincident points".into()));
        }
        let mut out = match self.median_edge_length(g) {
            Some(m) => self.scaled(target / m),
            None if min.is_finite() => self.scaled(target / min),
            None => self.clone(),
        };
        let min = out.min_distance();
        if min.is_finite() && min < floor {
            out = out.scaled(floor / min);
        }
        Ok(out)
    }
}

/// Embedding quality of a layout: smallest edge interaction over largest
/// non-edge interaction under the 1/r⁶ law. `+∞` when either set is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingQuality {
    pub ratio: f64,
}

impl EmbeddingQuality {
    pub fn is_sentinel(&self) -> bool {
        self.ratio.is_infinite()
    }

    /// Every edge interacts more strongly than every non-edge.
    pub fn is_faithful(&self) -> bool {
        self.ratio > 1.0
    }
}

pub fn interaction_ratio(g: &Graph, layout: &Layout) -> Result<EmbeddingQuality> {
    let n = g.node_count();
    if layout.len() != n {
        return Err(Error::invalid(format!(
            "layout has {} positions for {n} nodes",
            layout.len()
        )));
    }
    let mut max_edge: f64 = 0.0;
    let mut min_non_edge = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let d = layout.distance(a, b);
            if d <= 0.0 {
                return Err(Error::Domain(format!("nodes {a} and {b} coincide")));
            }
            if g.has_edge(a, b) {
                max_edge = max_edge.max(d);
            } else {
                min_non_edge = min_non_edge.min(d);
            }
        }
    }
    let ratio = if g.edge_count() == 0 || min_non_edge.is_infinite() {
        f64::INFINITY
    } else {
        (min_non_edge / max_edge).powi(6)
    };
    Ok(EmbeddingQuality { ratio })
}

/// Writes `graph_id,ratio_before,ratio_after` rows.
pub fn write_ratio_csv(path: &Path, rows: &[(usize, f64, f64)]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "graph_id,ratio_before,ratio_after")?;
    for (id, before, after) in rows {
        writeln!(f, "{id},{before},{after}")?;
    }
    Ok(())
}
