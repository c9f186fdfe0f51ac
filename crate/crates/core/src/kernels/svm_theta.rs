use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{symmetric_from_fn, KernelKind, KernelMatrix};
use crate::graphs::{Graph, GraphDataset};
use crate::numeric::sorted_symmetric_eigen;
use crate::{Error, Result};

const KKT_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmThetaConfig {
    /// Subsets drawn per graph and subset size.
    pub n_subset_samples: usize,
    pub base_alpha: f64,
    pub base_beta: f64,
    pub seed: u64,
}

impl Default for SvmThetaConfig {
    fn default() -> Self {
        SvmThetaConfig {
            n_subset_samples: 50,
            base_alpha: 1.0,
            base_beta: 1.0,
            seed: 0,
        }
    }
}

/// Optimal α of max 2Σα − αᵀκα over α ≥ 0 with κ = A/ρ + I and
/// ρ = −λ_min(A) (ρ = 1 for edgeless graphs). Σα approximates ϑ(G).
pub fn theta_weights(g: &Graph) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::invalid("graph has no vertices"));
    }
    let a = g.adjacency_matrix();
    let (eig, _) = sorted_symmetric_eigen(&a);
    if !eig[0].is_finite() {
        return Err(Error::Numeric("adjacency eigensolve failed".into()));
    }
    let rho = if eig[0] < -1e-12 { -eig[0] } else { 1.0 };
    let kappa = a / rho + nalgebra::DMatrix::identity(n, n);
    let mut alpha = vec![0.0f64; n];
    // grad[i] = (κα)_i
    let mut grad = vec![0.0f64; n];
    for sweep in 0.. {
        let mut violation: f64 = 0.0;
        for i in 0..n {
            let r = 1.0 - grad[i];
            violation = violation.max(if alpha[i] > 0.0 { r.abs() } else { r.max(0.0) });
            let next = (alpha[i] + r / kappa[(i, i)]).max(0.0);
            let d = next - alpha[i];
            if d != 0.0 {
                alpha[i] = next;
                for (j, gj) in grad.iter_mut().enumerate() {
                    *gj += kappa[(j, i)] * d;
                }
            }
        }
        if violation < KKT_TOL {
            break;
        }
        if sweep >= MAX_SWEEPS {
            return Err(Error::Numeric(format!(
                "theta coordinate ascent did not converge (KKT violation {violation:e})"
            )));
        }
    }
    Ok(alpha)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// ϑ_B for the sampled subsets of each size; entry `s - 1` holds size `s`.
fn subset_thetas(alpha: &[f64], budget: usize, seed: u64, index: u64) -> Vec<Vec<f64>> {
    let n = alpha.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (1..=n)
        .map(|s| {
            let mut out = Vec::new();
            if binomial(n, s) <= budget as f64 {
                for_each_combination(n, s, |b| out.push(b.iter().map(|&j| alpha[j]).sum()));
            } else {
                for _ in 0..budget {
                    out.push(sample(&mut rng, n, s).iter().map(|j| alpha[j]).sum());
                }
            }
            out
        })
        .collect()
}

/// Σ_s mean over sampled size-s subset pairs of (β + (ϑ_B − ϑ_B')²)^(−α).
pub fn svm_theta_kernel(ds: &GraphDataset, config: &SvmThetaConfig) -> Result<KernelMatrix> {
    if config.n_subset_samples == 0 || !(config.base_alpha > 0.0) || !(config.base_beta > 0.0) {
        return Err(Error::invalid("subset budget and base kernel parameters must be positive"));
    }
    let thetas: Vec<Vec<Vec<f64>>> = ds
        .graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let alpha = theta_weights(g)?;
            Ok(subset_thetas(&alpha, config.n_subset_samples, config.seed, i as u64))
        })
        .collect::<Result<_>>()?;
    let (a, b) = (config.base_alpha, config.base_beta);
    let base = |d: f64| {
        if a == 1.0 {
            1.0 / (b + d * d)
        } else {
            (b + d * d).powf(-a)
        }
    };
    let k = symmetric_from_fn(ds.len(), |i, j| {
        thetas[i]
            .iter()
            .zip(&thetas[j])
            .map(|(x, y)| {
                let total: f64 = x.iter().map(|u| y.iter().map(|v| base(u - v)).sum::<f64>()).sum();
                total / (x.len() * y.len()) as f64
            })
            .sum()
    });
    KernelMatrix::new(KernelKind::SvmTheta, (0..ds.len()).collect(), k)
}
