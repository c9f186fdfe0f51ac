use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{KernelKind, KernelMatrix};
use crate::graphs::{Graph, GraphDataset};
use crate::numeric::sorted_symmetric_eigen;
use crate::{Error, Result};

/// Decay of the geometric walk weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RandomWalkLambda {
    /// λ = factor / (ρ₁ρ₂) for each pair, ρ being the spectral radius.
    Relative(f64),
    Fixed(f64),
}

impl Default for RandomWalkLambda {
    fn default() -> Self {
        RandomWalkLambda::Relative(0.9)
    }
}

struct Spectrum {
    values: Vec<f64>,
    /// Squared projections (eᵀu_a)² of the all-ones vector.
    weights: Vec<f64>,
    radius: f64,
}

fn spectrum(g: &Graph) -> Spectrum {
    let (values, vectors) = sorted_symmetric_eigen(&g.adjacency_matrix());
    let weights = (0..values.len()).map(|a| vectors.column(a).sum().powi(2)).collect();
    let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Spectrum {
        values,
        weights,
        radius,
    }
}

fn pair_value(s: &Spectrum, t: &Spectrum, lambda: f64) -> f64 {
    let mut total = 0.0;
    for (la, wa) in s.values.iter().zip(&s.weights) {
        for (lb, wb) in t.values.iter().zip(&t.weights) {
            total += wa * wb / (1.0 - lambda * la * lb);
        }
    }
    total
}

/// eᵀ(I − λ A₁⊗A₂)⁻¹e through the eigendecompositions of A₁ and A₂.
pub fn random_walk_kernel(ds: &GraphDataset, lambda: RandomWalkLambda) -> Result<KernelMatrix> {
    let spectra: Vec<Spectrum> = ds.graphs.iter().map(spectrum).collect();
    let m = ds.len();
    let mut k = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let (s, t) = (&spectra[i], &spectra[j]);
            let rr = s.radius * t.radius;
            let lam = match lambda {
                RandomWalkLambda::Relative(f) => {
                    if !(0.0..1.0).contains(&f) {
                        return Err(Error::Domain("relative walk decay must lie in [0, 1)".into()));
                    }
                    if rr > 0.0 {
                        f / rr
                    } else {
                        0.0
                    }
                }
                RandomWalkLambda::Fixed(l) => {
                    if l < 0.0 || l * rr >= 1.0 {
                        return Err(Error::Domain(format!(
                            "walk series diverges for graphs {j} and {i}: λ = {l} but 1/(ρ₁ρ₂) = {}",
                            1.0 / rr
                        )));
                    }
                    l
                }
            };
            let v = pair_value(s, t, lam);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    KernelMatrix::new(KernelKind::RandomWalk, (0..m).collect(), k)
}

/// Direct inversion on the product graph; used as a cross-check.
pub fn random_walk_direct(g1: &Graph, g2: &Graph, lambda: f64) -> Result<f64> {
    let ax = g1.adjacency_matrix().kronecker(&g2.adjacency_matrix());
    let n = ax.nrows();
    let m = DMatrix::identity(n, n) - ax * lambda;
    let inv = m.try_inverse().ok_or(Error::Singular)?;
    Ok(inv.sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lambda_counts_vertex_pairs() {
        let ds = GraphDataset::new("t", "unit", vec![Graph::path(3).unwrap(), Graph::cycle(5).unwrap()]);
        let k = random_walk_kernel(&ds, RandomWalkLambda::Fixed(0.0)).unwrap();
        assert!((k.values[(0, 1)] - 15.0).abs() < 1e-10);
        assert!((k.values[(0, 0)] - 9.0).abs() < 1e-10);
    }

    #[test]
    fn single_edges_match_geometric_series() {
        // A⊗A for one edge is an involution on 4 states with row sums 1:
        // eᵀ(λA×)^k e = 4λ^k.
        let lambda = 0.1;
        let e = Graph::path(2).unwrap();
        let ds = GraphDataset::new("t", "unit", vec![e.clone(), e]);
        let k = random_walk_kernel(&ds, RandomWalkLambda::Fixed(lambda)).unwrap();
        let series: f64 = (0..200).map(|p| 4.0 * lambda.powi(p)).sum();
        assert!((k.values[(0, 1)] - series).abs() < 1e-10);
    }

    #[test]
    fn spectral_matches_direct_inversion() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let graphs: Vec<Graph> = (0..2)
                .map(|_| {
                    let edges: Vec<(usize, usize)> = (0..5)
                        .flat_map(|a| (a + 1..5).map(move |b| (a, b)))
                        .filter(|_| rng.random_bool(0.5))
                        .collect();
                    Graph::new(5, edges).unwrap()
                })
                .collect();
            let ds = GraphDataset::new("t", "unit", graphs.clone());
            let k = random_walk_kernel(&ds, RandomWalkLambda::default()).unwrap();
            let s0 = spectrum(&graphs[0]).radius;
            let s1 = spectrum(&graphs[1]).radius;
            let lam = if s0 * s1 > 0.0 { 0.9 / (s0 * s1) } else { 0.0 };
            let direct = random_walk_direct(&graphs[0], &graphs[1], lam).unwrap();
            assert!((k.values[(0, 1)] - direct).abs() <= 1e-8 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn divergent_lambda_names_the_pair() {
        let ds = GraphDataset::new("t", "unit", vec![Graph::empty(2).unwrap(), Graph::complete(4).unwrap()]);
        let err = random_walk_kernel(&ds, RandomWalkLambda::Fixed(0.2)).unwrap_err();
        assert!(err.to_string().contains("graphs 1 and 1"));
    }
}
