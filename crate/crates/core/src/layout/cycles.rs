//! Ring statistics, structural similarity, and k-means grouping of graphs
//! into batches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graphs::{Graph, GraphDataset};
use crate::{Error, Result};

/// Number of simple cycles with exactly `length` nodes, each counted once.
pub fn count_cycles(g: &Graph, length: usize) -> usize {
    if length < 3 {
        return 0;
    }
    let n = g.node_count();
    let mut on_path = vec![false; n];
    let mut total = 0;
    for start in 0..n {
        on_path[start] = true;
        total += extend(g, start, start, 1, length, &mut on_path);
        on_path[start] = false;
    }
    // Every cycle is found once per direction from its smallest node.
    total / 2
}

fn extend(g: &Graph, start: usize, v: usize, depth: usize, length: usize, on_path: &mut [bool]) -> usize {
    let mut count = 0;
    for &w in g.neighbors(v) {
        if w == start && depth == length {
            count += 1;
        } else if w > start && !on_path[w] && depth < length {
            on_path[w] = true;
            count += extend(g, start, w, depth + 1, length, on_path);
            on_path[w] = false;
        }
    }
    count
}

/// (pentagon count, hexagon count, node count).
pub fn structural_features(g: &Graph) -> [usize; 3] {
    [count_cycles(g, 5), count_cycles(g, 6), g.node_count()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    pub pentagon: f64,
    pub hexagon: f64,
    pub size: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        SimilarityWeights {
            pentagon: 0.4,
            hexagon: 0.4,
            size: 0.2,
        }
    }
}

impl SimilarityWeights {
    fn validate(&self) -> Result<()> {
        let w = [self.pentagon, self.hexagon, self.size];
        if w.iter().any(|x| !(*x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("similarity weights must be nonnegative and sum to 1"));
        }
        Ok(())
    }
}

fn similarity_from_features(f1: &[usize; 3], f2: &[usize; 3], alpha: f64, w: &SimilarityWeights) -> f64 {
    let term = |a: usize, b: usize| (-alpha * (a as f64 - b as f64).abs()).exp();
    w.pentagon * term(f1[0], f2[0]) + w.hexagon * term(f1[1], f2[1]) + w.size * term(f1[2], f2[2])
}

/// Weighted sum of `exp(−α |ΔN|)` over pentagon count, hexagon count and
/// size. Equals 1 for graphs with identical features.
pub fn structural_similarity(g1: &Graph, g2: &Graph, alpha: f64, weights: &SimilarityWeights) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    weights.validate()?;
    Ok(similarity_from_features(
        &structural_features(g1),
        &structural_features(g2),
        alpha,
        weights,
    ))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Lloyd's k-means with k-means++ seeding. Returns one cluster index per
/// point; deterministic under `seed`.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<Vec<usize>> {
    let m = points.len();
    if k == 0 || k > m {
        return Err(Error::invalid(format!("cannot form {k} clusters from {m} points")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = vec![points[rng.random_range(0..m)].clone()];
    while centers.len() < k {
        let d: Vec<f64> = points
            .iter()
            .map(|p| centers.iter().map(|c| sq_dist(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d.iter().sum();
        let next = if total > 0.0 {
            let mut x = rng.random::<f64>() * total;
            let mut chosen = m - 1;
            for (i, di) in d.iter().enumerate() {
                if x < *di {
                    chosen = i;
                    break;
                }
                x -= di;
            }
            chosen
        } else {
            rng.random_range(0..m)
        };
        centers.push(points[next].clone());
    }
    let mut assign = vec![usize::MAX; m];
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(p, &centers[a]).total_cmp(&sq_dist(p, &centers[b])))
                .unwrap();
            if assign[i] != best {
                assign[i] = best;
                changed = true;
            }
        }
        // Empty clusters take the point farthest from its center.
        for c in 0..k {
            if !assign.contains(&c) {
                let far = (0..m)
                    .filter(|&i| assign.iter().filter(|&&a| a == assign[i]).count() > 1)
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &centers[assign[a]])
                            .total_cmp(&sq_dist(&points[b], &centers[assign[b]]))
                    })
                    .expect("k <= m leaves a donor cluster");
                assign[far] = c;
                changed = true;
            }
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == c)
                .map(|(p, _)| p)
                .collect();
            for (d, x) in center.iter_mut().enumerate() {
                *x = members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(assign)
}

/// Groups graph indices into `n_batches` batches by k-means on the rows of
/// the structural similarity matrix. Batches are listed by their smallest
/// member; members are in increasing index order.
pub fn cluster_dataset(
    ds: &GraphDataset,
    n_batches: usize,
    alpha: f64,
    weights: &SimilarityWeights,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if n_batches == 0 || n_batches > ds.len() {
        return Err(Error::invalid(format!(
            "cannot split {} graphs into {n_batches} batches",
            ds.len()
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    weights.validate()?;
    let features: Vec<[usize; 3]> = ds.graphs.iter().map(structural_features).collect();
    let rows: Vec<Vec<f64>> = features
        .iter()
        .map(|a| {
            features
                .iter()
                .map(|b| similarity_from_features(a, b, alpha, weights))
                .collect()
        })
        .collect();
    let assign = kmeans(&rows, n_batches, seed, 300)?;
    let mut batches = vec![Vec::new(); n_batches];
    for (i, a) in assign.into_iter().enumerate() {
        batches[a].push(i);
    }
    batches.sort_by_key(|b| b[0]);
    Ok(batches)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_graphs() {
        assert_eq!(count_cycles(&Graph::cycle(5).unwrap(), 5), 1);
        assert_eq!(count_cycles(&Graph::cycle(5).unwrap(), 6), 0);
        assert_eq!(count_cycles(&Graph::cycle(6).unwrap(), 6), 1);
        assert_eq!(count_cycles(&Graph::cycle(6).unwrap(), 5), 0);
        assert_eq!(count_cycles(&Graph::complete(4).unwrap(), 3), 4);
        assert_eq!(count_cycles(&Graph::complete(4).unwrap(), 4), 3);
    }

    #[test]
    fn fused_hexagons() {
        // Naphthalene skeleton: two hexagons sharing the 0-5 bond.
        let g = Graph::new(
            10,
            [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (5, 6), (6, 7), (7, 8), (8, 9), (9, 0)],
        )
        .unwrap();
        assert_eq!(count_cycles(&g, 6), 2);
        assert_eq!(count_cycles(&g, 10), 1);
        assert_eq!(count_cycles(&g, 5), 0);
    }

    #[test]
    fn similarity_values() {
        let c5 = Graph::cycle(5).unwrap();
        let w = SimilarityWeights { pentagon: 1.0, hexagon: 0.0, size: 0.0 };
        assert_eq!(structural_similarity(&c5, &c5, 1.0, &w).unwrap(), 1.0);
        let p5 = Graph::path(5).unwrap();
        let s = structural_similarity(&c5, &p5, 1.0, &w).unwrap();
        assert!((s - (-1f64).exp()).abs() < 1e-12);
        assert!(structural_similarity(&c5, &p5, 0.0, &w).is_err());
    }

    #[test]
    fn clustering_partitions() {
        let graphs: Vec<Graph> = (0..6)
            .map(|i| if i % 2 == 0 { Graph::cycle(6).unwrap() } else { Graph::cycle(5).unwrap() })
            .collect();
        let ds = GraphDataset::new("t", "unit", graphs);
        let w = SimilarityWeights::default();
        let one = cluster_dataset(&ds, 1, 1.0, &w, 0).unwrap();
        assert_eq!(one, vec![vec![0, 1, 2, 3, 4, 5]]);
        let two = cluster_dataset(&ds, 2, 1.0, &w, 0).unwrap();
        assert_eq!(two, vec![vec![0, 2, 4], vec![1, 3, 5]]);
        assert!(cluster_dataset(&ds, 7, 1.0, &w, 0).is_err());
    }
}
