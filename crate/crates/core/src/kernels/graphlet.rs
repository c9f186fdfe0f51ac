use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{symmetric_from_fn, KernelKind, KernelMatrix};
use crate::graphs::{Graph, GraphDataset};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphletConfig {
    pub k_max: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for GraphletConfig {
    fn default() -> Self {
        GraphletConfig {
            k_max: 5,
            n_samples: 500,
            seed: 0,
        }
    }
}

fn edge_mask(g: &Graph, perm: &[usize]) -> u32 {
    let n = g.node_count();
    let mut mask = 0u32;
    let mut bit = 0;
    for a in 0..n {
        for b in a + 1..n {
            if g.has_edge(perm[a], perm[b]) {
                mask |= 1 << bit;
            }
            bit += 1;
        }
    }
    mask
}

/// Smallest edge mask over all vertex orderings; only for tiny graphs.
fn canonical_form(g: &Graph) -> u32 {
    fn rec(g: &Graph, perm: &mut Vec<usize>, used: &mut [bool], best: &mut u32) {
        if perm.len() == g.node_count() {
            *best = (*best).min(edge_mask(g, perm));
            return;
        }
        for v in 0..g.node_count() {
            if !used[v] {
                used[v] = true;
                perm.push(v);
                rec(g, perm, used, best);
                perm.pop();
                used[v] = false;
            }
        }
    }
    let mut best = u32::MAX;
    rec(g, &mut Vec::new(), &mut vec![false; g.node_count()], &mut best);
    best
}

fn random_connected_graph(k: usize, rng: &mut impl Rng) -> Graph {
    loop {
        let mut edges = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                if rng.random_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let g = Graph::new(k, edges).expect("valid edges");
        if g.is_connected() {
            return g;
        }
    }
}

/// Distinct connected graphlets drawn uniformly over sizes 3..=k_max from
/// G(k, 1/2), ordered by (size, canonical form).
fn sample_graphlets(config: &GraphletConfig) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut found = BTreeMap::new();
    for _ in 0..config.n_samples {
        let k = rng.random_range(3..=config.k_max);
        let g = random_connected_graph(k, &mut rng);
        found.entry((k, canonical_form(&g))).or_insert(g);
    }
    found.into_values().collect()
}

/// Number of injective maps of `h` into `g` that preserve both edges and
/// non-edges (induced embeddings).
pub fn count_embeddings(h: &Graph, g: &Graph) -> u64 {
    let k = h.node_count();
    if k == 0 {
        return 1;
    }
    if k > g.node_count() {
        return 0;
    }
    // Visit pattern vertices so that each one, where possible, has an
    // already-placed neighbor to draw candidates from.
    let mut order = Vec::with_capacity(k);
    let mut seen = vec![false; k];
    for root in 0..k {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        order.push(root);
        let mut head = order.len() - 1;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &w in h.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
    }
    let anchor: Vec<Option<usize>> = order
        .iter()
        .enumerate()
        .map(|(pos, &u)| order[..pos].iter().copied().find(|&p| h.has_edge(u, p)))
        .collect();
    let mut image = vec![usize::MAX; k];
    let mut used = vec![false; g.node_count()];
    let all: Vec<usize> = (0..g.node_count()).collect();

    fn extend(
        pos: usize,
        h: &Graph,
        g: &Graph,
        order: &[usize],
        anchor: &[Option<usize>],
        all: &[usize],
        image: &mut [usize],
        used: &mut [bool],
    ) -> u64 {
        if pos == order.len() {
            return 1;
        }
        let u = order[pos];
        let candidates = match anchor[pos] {
            Some(p) => g.neighbors(image[p]),
            None => all,
        };
        let mut total = 0;
        for &v in candidates {
            if used[v] || g.degree(v) < h.degree(u) {
                continue;
            }
            let consistent = order[..pos]
                .iter()
                .all(|&w| h.has_edge(u, w) == g.has_edge(v, image[w]));
            if !consistent {
                continue;
            }
            used[v] = true;
            image[u] = v;
            total += extend(pos + 1, h, g, order, anchor, all, image, used);
            used[v] = false;
        }
        total
    }
    extend(0, h, g, &order, &anchor, &all, &mut image, &mut used)
}

/// Dot products of graphlet-count vectors normalized to unit sum.
pub fn graphlet_sampling_kernel(ds: &GraphDataset, config: &GraphletConfig) -> Result<KernelMatrix> {
    if !(3..=6).contains(&config.k_max) || config.n_samples == 0 {
        return Err(Error::invalid("graphlet sizes must be in 3..=6 with at least one sample"));
    }
    let graphlets = sample_graphlets(config);
    let features: Vec<Vec<f64>> = ds
        .graphs
        .iter()
        .map(|g| {
            let counts: Vec<f64> = graphlets.iter().map(|h| count_embeddings(h, g) as f64).collect();
            let total: f64 = counts.iter().sum();
            if total > 0.0 {
                counts.into_iter().map(|c| c / total).collect()
            } else {
                counts
            }
        })
        .collect();
    let k = symmetric_from_fn(ds.len(), |i, j| {
        features[i].iter().zip(&features[j]).map(|(a, b)| a * b).sum()
    });
    KernelMatrix::new(KernelKind::Graphlet, (0..ds.len()).collect(), k)
}
