//! Undirected unlabeled graphs, datasets, and the combinatorial oracles used
//! to validate the quantum feature map.

mod iso;
mod pair;
pub mod synthetic;
mod tudataset;
mod wl;

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use iso::{is_isomorphic, ISOMORPHISM_NODE_LIMIT};
pub use pair::{locally_equivalent_pair, locally_equivalent_pair_positions, node_classes, NodeClass};
pub use synthetic::{generate_synthetic, generate_synthetic_dataset, LatticeClass};
pub use tudataset::load_tudataset;
pub use wl::{wl_equivalent, wl_refine, WlColoring};

/// Binary class of a graph. `Positive` is the toxic / class-A side and maps
/// to `+1` in the SVM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn from_sign(value: f64) -> Self {
        if value >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

/// Simple undirected graph on nodes `0..node_count`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. There are no
/// self-loops and no parallel edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    label: Option<Label>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<Label>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;

    fn try_from(repr: GraphRepr) -> Result<Self> {
        Ok(Graph::new(repr.node_count, repr.edges)?.with_label(repr.label))
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            node_count: g.node_count,
            edges: g.edges,
            label: g.label,
        }
    }
}

impl Graph {
    /// Builds a graph, normalizing edge orientation and removing duplicates.
    /// Self-loops and out-of-range endpoints are rejected.
    pub fn new<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if node_count == 0 {
            return Err(Error::invalid("a graph needs at least one node"));
        }
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop on node {a}")));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        let mut adjacency = vec![Vec::new(); node_count];
        for &(a, b) in &normalized {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            node_count,
            edges: normalized,
            adjacency,
            label: None,
        })
    }

    pub fn empty(node_count: usize) -> Result<Self> {
        Graph::new(node_count, std::iter::empty())
    }

    pub fn path(node_count: usize) -> Result<Self> {
        Graph::new(node_count, (1..node_count).map(|i| (i - 1, i)))
    }

    pub fn cycle(node_count: usize) -> Result<Self> {
        if node_count < 3 {
            return Err(Error::invalid("a cycle needs at least three nodes"));
        }
        Graph::new(node_count, (0..node_count).map(|i| (i, (i + 1) % node_count)))
    }

    pub fn complete(node_count: usize) -> Result<Self> {
        Graph::new(
            node_count,
            (0..node_count).flat_map(|i| (i + 1..node_count).map(move |j| (i, j))),
        )
    }

    pub fn with_label(mut self, label: Option<Label>) -> Self {
        self.label = label;
        self
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn label(&self) -> Option<Label> {
        self.label
    }

    pub fn set_label(&mut self, label: Option<Label>) {
        self.label = label;
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.node_count;
        let mut a = DMatrix::zeros(n, n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    /// Relabels nodes: node `i` of `self` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.node_count {
            return Err(Error::invalid("permutation length mismatch"));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        Ok(Graph::new(
            self.node_count,
            self.edges.iter().map(|&(a, b)| (perm[a], perm[b])),
        )?
        .with_label(self.label))
    }

    /// Number of triangles (each counted once).
    pub fn triangle_count(&self) -> usize {
        let mut count = 0;
        for &(a, b) in &self.edges {
            count += self.adjacency[a]
                .iter()
                .filter(|&&c| c > b && self.has_edge(b, c))
                .count();
        }
        count
    }

    /// All-pairs hop distances; `None` for disconnected pairs.
    pub fn hop_distances(&self) -> Vec<Vec<Option<usize>>> {
        let n = self.node_count;
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for &(a, b) in &self.edges {
            d[a][b] = 1;
            d[b][a] = 1;
        }
        // Floyd-Warshall
        for k in 0..n {
            for i in 0..n {
                let dik = d[i][k];
                if dik == inf {
                    continue;
                }
                for j in 0..n {
                    let cand = dik + d[k][j];
                    if cand < d[i][j] {
                        d[i][j] = cand;
                    }
                }
            }
        }
        d.into_iter()
            .map(|row| row.into_iter().map(|x| (x < inf).then_some(x)).collect())
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Ordered collection of graphs. Indices are stable across pipeline stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDataset {
    pub name: String,
    pub provenance: String,
    pub graphs: Vec<Graph>,
}

impl GraphDataset {
    pub fn new(name: impl Into<String>, provenance: impl Into<String>, graphs: Vec<Graph>) -> Self {
        GraphDataset {
            name: name.into(),
            provenance: provenance.into(),
            graphs,
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Labels as SVM signs; fails if any graph is unlabeled.
    pub fn label_signs(&self) -> Result<Vec<f64>> {
        self.graphs
            .iter()
            .enumerate()
            .map(|(i, g)| {
                g.label()
                    .map(Label::sign)
                    .ok_or_else(|| Error::invalid(format!("graph {i} has no label")))
            })
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.graphs.iter().map(Graph::node_count).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Keeps graphs with at most `max_nodes` nodes, preserving order.
pub fn truncate_dataset(ds: &GraphDataset, max_nodes: usize) -> Result<GraphDataset> {
    if max_nodes == 0 {
        return Err(Error::invalid("max_nodes must be at least 1"));
    }
    Ok(GraphDataset {
        name: ds.name.clone(),
        provenance: format!("{} | truncated to <= {max_nodes} nodes", ds.provenance),
        graphs: ds
            .graphs
            .iter()
            .filter(|g| g.node_count() <= max_nodes)
            .cloned()
            .collect(),
    })
}

/// Per-size class counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub positive: usize,
    pub negative: usize,
}

pub fn size_histogram(ds: &GraphDataset) -> Result<BTreeMap<usize, ClassCounts>> {
    let mut hist: BTreeMap<usize, ClassCounts> = BTreeMap::new();
    for (i, g) in ds.graphs.iter().enumerate() {
        let entry = hist.entry(g.node_count()).or_default();
        match g.label() {
            Some(Label::Positive) => entry.positive += 1,
            Some(Label::Negative) => entry.negative += 1,
            None => return Err(Error::invalid(format!("graph {i} has no label"))),
        }
    }
    Ok(hist)
}
