//! Greedy batching of several layouts onto one triangular trap pattern.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Layout, LatticePoint, DEFAULT_NN_DISTANCE_UM};
use crate::graphs::Graph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlmConfig {
    pub spacing_um: f64,
    /// Largest accepted RMS relative pairwise-distance error after snapping.
    pub max_distortion: f64,
    pub rotation_step_deg: f64,
    /// Sub-cell offsets tried along each lattice axis.
    pub offsets_per_axis: usize,
    pub seed: u64,
}

impl Default for SlmConfig {
    fn default() -> Self {
        SlmConfig {
            spacing_um: DEFAULT_NN_DISTANCE_UM,
            max_distortion: 0.25,
            rotation_step_deg: 5.0,
            offsets_per_axis: 4,
            seed: 0,
        }
    }
}

/// Trap pattern shared by a batch of graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlmPattern {
    pub spacing_um: f64,
    pub traps: Vec<LatticePoint>,
    /// Graph id → trap of each node, in node order.
    pub assignments: BTreeMap<usize, Vec<LatticePoint>>,
    /// Graphs whose induced unit-disk graph on their traps differs from the
    /// input graph.
    pub defects: Vec<usize>,
}

impl SlmPattern {
    pub fn trap_count(&self) -> usize {
        self.traps.len()
    }

    /// Atom positions in µm for one batched graph.
    pub fn positions(&self, graph_id: usize) -> Option<Vec<[f64; 2]>> {
        self.assignments
            .get(&graph_id)
            .map(|pts| pts.iter().map(|p| p.position(self.spacing_um)).collect())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Unit-disk graph on lattice points with the threshold halfway between the
/// first and second neighbor shells, i.e. nearest neighbors only.
pub fn induced_lattice_graph(points: &[LatticePoint]) -> Result<Graph> {
    let mut edges = Vec::new();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            if points[a].dist2(points[b]) == 1 {
                edges.push((a, b));
            }
        }
    }
    Graph::new(points.len(), edges)
}

fn mismatches(g: &Graph, points: &[LatticePoint]) -> usize {
    let n = g.node_count();
    let mut count = 0;
    for a in 0..n {
        for b in a + 1..n {
            if g.has_edge(a, b) != (points[a].dist2(points[b]) == 1) {
                count += 1;
            }
        }
    }
    count
}

fn distortion(layout: &Layout, points: &[LatticePoint], spacing: f64) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for a in 0..n {
        for b in a + 1..n {
            let d0 = layout.distance(a, b);
            let d1 = spacing * (points[a].dist2(points[b]) as f64).sqrt();
            sum += ((d1 - d0) / d0).powi(2);
            pairs += 1;
        }
    }
    (sum / pairs as f64).sqrt()
}

/// Snaps positions node by node to the nearest lattice point not already
/// taken by an earlier node.
fn snap(positions: &[[f64; 2]], spacing: f64) -> Vec<LatticePoint> {
    let mut taken = HashSet::new();
    let mut out = Vec::with_capacity(positions.len());
    for &pos in positions {
        let near = LatticePoint::nearest(pos, spacing);
        let mut candidates: Vec<LatticePoint> = (-2..=2)
            .flat_map(|di| (-2..=2).map(move |dj| near.translated(di, dj)))
            .collect();
        let d = |p: &LatticePoint| {
            let q = p.position(spacing);
            (q[0] - pos[0]).powi(2) + (q[1] - pos[1]).powi(2)
        };
        candidates.sort_by(|a, b| d(a).total_cmp(&d(b)).then(a.cmp(b)));
        let chosen = candidates
            .into_iter()
            .find(|p| !taken.contains(p))
            .expect("25 candidates exceed the nodes competing for them");
        taken.insert(chosen);
        out.push(chosen);
    }
    out
}

/// Best lattice shape for one layout over rotations, a reflection and
/// sub-cell offsets, ranked by (unit-disk mismatches, distortion).
fn best_shape(g: &Graph, layout: &Layout, config: &SlmConfig) -> (Vec<LatticePoint>, f64) {
    let spacing = config.spacing_um;
    let centered = layout.centered();
    let steps = ((60.0 / config.rotation_step_deg).round() as usize).max(1);
    let offsets = config.offsets_per_axis.max(1);
    let mut best: Option<(usize, f64, Vec<LatticePoint>)> = None;
    for reflect in [false, true] {
        for r in 0..steps {
            let theta = (r as f64 * 60.0 / steps as f64).to_radians();
            let (s, c) = theta.sin_cos();
            for oi in 0..offsets {
                for oj in 0..offsets {
                    let off = [
                        (oi as f64 + 0.5 * oj as f64) / offsets as f64 * spacing,
                        oj as f64 * 3f64.sqrt() / 2.0 / offsets as f64 * spacing,
                    ];
                    let moved: Vec<[f64; 2]> = centered
                        .positions
                        .iter()
                        .map(|p| {
                            let y = if reflect { -p[1] } else { p[1] };
                            [c * p[0] - s * y + off[0], s * p[0] + c * y + off[1]]
                        })
                        .collect();
                    let pts = snap(&moved, spacing);
                    let key = (mismatches(g, &pts), distortion(layout, &pts, spacing));
                    let better = match &best {
                        None => true,
                        Some((m, d, _)) => key.0 < *m || (key.0 == *m && key.1 < *d - 1e-12),
                    };
                    if better {
                        best = Some((key.0, key.1, pts));
                    }
                }
            }
        }
    }
    let (_, d, pts) = best.expect("at least one candidate");
    (pts, d)
}

fn symmetry(p: LatticePoint, op: usize) -> LatticePoint {
    let q = if op >= 6 { p.reflected() } else { p };
    q.rotated(op % 6)
}

/// Places a shape by a lattice symmetry and translation maximizing overlap
/// with existing traps; ties go to the placement closest to the pattern's
/// center, then to the smallest candidate.
fn place(shape: &[LatticePoint], traps: &BTreeSet<LatticePoint>) -> Vec<LatticePoint> {
    if traps.is_empty() {
        return shape.to_vec();
    }
    let spacing = 1.0;
    let n = traps.len() as f64;
    let center = traps.iter().fold([0.0, 0.0], |acc, t| {
        let p = t.position(spacing);
        [acc[0] + p[0] / n, acc[1] + p[1] / n]
    });
    let mut best: Option<(usize, f64, Vec<LatticePoint>)> = None;
    for op in 0..12 {
        let s: Vec<LatticePoint> = shape.iter().map(|&p| symmetry(p, op)).collect();
        let mut seen = HashSet::new();
        for &anchor in &s {
            for &t in traps {
                let (di, dj) = (t.i - anchor.i, t.j - anchor.j);
                if !seen.insert((di, dj)) {
                    continue;
                }
                let cand: Vec<LatticePoint> = s.iter().map(|p| p.translated(di, dj)).collect();
                let overlap = cand.iter().filter(|p| traps.contains(p)).count();
                let spread: f64 = cand
                    .iter()
                    .filter(|p| !traps.contains(p))
                    .map(|p| {
                        let q = p.position(spacing);
                        (q[0] - center[0]).powi(2) + (q[1] - center[1]).powi(2)
                    })
                    .sum();
                let better = match &best {
                    None => true,
                    Some((o, sp, c)) => {
                        overlap > *o
                            || (overlap == *o && spread < *sp - 1e-9)
                            || (overlap == *o && (spread - *sp).abs() <= 1e-9 && cand < *c)
                    }
                };
                if better {
                    best = Some((overlap, spread, cand));
                }
            }
        }
    }
    best.expect("nonempty shape").2
}

/// Batches `(graph_id, graph, layout)` triples onto one pattern. Graphs are
/// processed by increasing size. The pattern is padded with random lattice
/// points adjacent to existing traps until it holds at least twice as many
/// traps as the largest graph has nodes.
pub fn batch_to_slm(batch: &[(usize, &Graph, &Layout)], config: &SlmConfig) -> Result<SlmPattern> {
    if !(config.spacing_um > 0.0) {
        return Err(Error::invalid("lattice spacing must be positive"));
    }
    let mut order: Vec<usize> = (0..batch.len()).collect();
    order.sort_by_key(|&k| batch[k].1.node_count());
    let mut traps = BTreeSet::new();
    let mut assignments = BTreeMap::new();
    let mut defects = Vec::new();
    for k in order {
        let (id, g, layout) = batch[k];
        if layout.len() != g.node_count() {
            return Err(Error::invalid(format!("layout of graph {id} does not match it")));
        }
        let scaled = match layout.median_edge_length(g) {
            Some(m) if m > 0.0 => layout.scaled(config.spacing_um / m),
            _ => layout.clone(),
        };
        let (shape, d) = best_shape(g, &scaled, config);
        if d > config.max_distortion {
            return Err(Error::Placement {
                graph_id: id,
                reason: format!(
                    "distortion {d:.3} exceeds the bound {}",
                    config.max_distortion
                ),
            });
        }
        let placed = place(&shape, &traps);
        if mismatches(g, &placed) > 0 {
            defects.push(id);
        }
        traps.extend(placed.iter().copied());
        assignments.insert(id, placed);
    }
    let largest = batch.iter().map(|b| b.1.node_count()).max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while !traps.is_empty() && traps.len() < 2 * largest {
        let pool: Vec<LatticePoint> = traps.iter().copied().collect();
        let base = pool[rng.random_range(0..pool.len())];
        let next = base.neighbors().nth(rng.random_range(0..6)).unwrap();
        traps.insert(next);
    }
    defects.sort_unstable();
    Ok(SlmPattern {
        spacing_um: config.spacing_um,
        traps: traps.into_iter().collect(),
        assignments,
        defects,
    })
}
