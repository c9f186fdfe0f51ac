//! Weighted random walks on the triangular lattice favoring a honeycomb
//! (class A) or kagome (class B) sublattice.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, GraphDataset, Label};
use crate::layout::LatticePoint;
use crate::{Error, Result};

const MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeClass {
    /// Class A, labeled positive.
    Honeycomb,
    /// Class B, labeled negative.
    Kagome,
}

impl LatticeClass {
    pub fn favors(self, site: LatticePoint) -> bool {
        match self {
            LatticeClass::Honeycomb => site.in_honeycomb(),
            LatticeClass::Kagome => site.in_kagome(),
        }
    }

    pub fn label(self) -> Label {
        match self {
            LatticeClass::Honeycomb => Label::Positive,
            LatticeClass::Kagome => Label::Negative,
        }
    }
}

/// A generated graph together with the lattice sites it was built on.
/// Node `k` sits on `sites[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSample {
    pub graph: Graph,
    pub sites: Vec<LatticePoint>,
}

impl SyntheticSample {
    pub fn positions(&self, spacing: f64) -> Vec<[f64; 2]> {
        self.sites.iter().map(|s| s.position(spacing)).collect()
    }
}

fn check_args(p: f64, n_nodes: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0, 1], got {p}")));
    }
    if n_nodes == 0 {
        return Err(Error::invalid("n_nodes must be at least 1"));
    }
    Ok(())
}

fn walk(class: LatticeClass, p: f64, n_nodes: usize, rng: &mut impl Rng) -> Option<Vec<LatticePoint>> {
    // Uniform favored start site within one periodic cell (6 × 6 covers both
    // sublattice periods); translations do not change the graph.
    let start = loop {
        let s = LatticePoint::new(rng.random_range(0..6), rng.random_range(0..6));
        if class.favors(s) {
            break s;
        }
    };
    let mut visited = vec![start];
    let mut seen: HashSet<LatticePoint> = HashSet::from([start]);
    let mut current = start;
    let max_steps = 1000 * n_nodes + 1000;
    for _ in 0..max_steps {
        if visited.len() == n_nodes {
            return Some(visited);
        }
        let weights: Vec<f64> = current
            .neighbors()
            .map(|n| if class.favors(n) { 1.0 } else { p })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let mut x = rng.random::<f64>() * total;
        let mut chosen = 5;
        for (k, w) in weights.iter().enumerate() {
            if x < *w {
                chosen = k;
                break;
            }
            x -= w;
        }
        current = current.neighbors().nth(chosen).unwrap();
        if seen.insert(current) {
            visited.push(current);
        }
    }
    (visited.len() == n_nodes).then_some(visited)
}

fn unit_disk_graph(sites: &[LatticePoint]) -> Result<Graph> {
    let mut edges = Vec::new();
    for a in 0..sites.len() {
        for b in a + 1..sites.len() {
            if sites[a].dist2(sites[b]) == 1 {
                edges.push((a, b));
            }
        }
    }
    Graph::new(sites.len(), edges)
}

/// One walk with its lattice sites. Edges join nearest-neighbor sites only.
pub fn generate_synthetic_sample(
    class: LatticeClass,
    p: f64,
    n_nodes: usize,
    seed: u64,
) -> Result<SyntheticSample> {
    check_args(p, n_nodes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RETRIES {
        if let Some(sites) = walk(class, p, n_nodes, &mut rng) {
            let graph = unit_disk_graph(&sites)?.with_label(Some(class.label()));
            return Ok(SyntheticSample { graph, sites });
        }
    }
    Err(Error::Generation(format!(
        "walk for {class:?} with p = {p} did not reach {n_nodes} sites after {MAX_RETRIES} attempts"
    )))
}

pub fn generate_synthetic(class: LatticeClass, p: f64, n_nodes: usize, seed: u64) -> Result<Graph> {
    Ok(generate_synthetic_sample(class, p, n_nodes, seed)?.graph)
}

/// `per_class` samples of each class, interleaved A, B, A, B, ...
pub fn generate_synthetic_samples(
    p: f64,
    per_class: usize,
    n_nodes: usize,
    seed: u64,
) -> Result<Vec<SyntheticSample>> {
    check_args(p, n_nodes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * per_class);
    for _ in 0..per_class {
        for class in [LatticeClass::Honeycomb, LatticeClass::Kagome] {
            out.push(generate_synthetic_sample(class, p, n_nodes, rng.random())?);
        }
    }
    Ok(out)
}

pub fn generate_synthetic_dataset(
    p: f64,
    per_class: usize,
    n_nodes: usize,
    seed: u64,
) -> Result<GraphDataset> {
    let samples = generate_synthetic_samples(p, per_class, n_nodes, seed)?;
    Ok(GraphDataset::new(
        format!("synthetic-p{p}"),
        format!("triangular-lattice walks, p = {p}, {n_nodes} nodes, seed {seed}"),
        samples.into_iter().map(|s| s.graph).collect(),
    ))
}
