//! Graph kernels: the quantum evolution kernel built from excitation
//! histograms and the classical baselines.

mod graphlet;
mod qek;
mod random_walk;
mod shortest_path;
mod svm_theta;

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graphs::GraphDataset;
use crate::numeric::sorted_symmetric_eigen;
use crate::{Error, Result};

pub use graphlet::{count_embeddings, graphlet_sampling_kernel, GraphletConfig};
pub use qek::{
    convolve_binomial, js_divergence, qek_matrix, qek_size_compensated,
    rabi_excitation_probability, shannon_entropy, DistributionSet,
};
pub use random_walk::{random_walk_direct, random_walk_kernel, RandomWalkLambda};
pub use shortest_path::{shortest_path_histogram, shortest_path_kernel};
pub use svm_theta::{svm_theta_kernel, theta_weights, SvmThetaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    Qek,
    QekConv,
    SvmTheta,
    Size,
    Graphlet,
    RandomWalk,
    ShortestPath,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Qek => "QEK",
            KernelKind::QekConv => "QEK-conv",
            KernelKind::SvmTheta => "SVM-theta",
            KernelKind::Size => "Size",
            KernelKind::Graphlet => "GS",
            KernelKind::RandomWalk => "RW",
            KernelKind::ShortestPath => "SP",
        }
    }

    pub const ALL: [KernelKind; 7] = [
        KernelKind::Qek,
        KernelKind::QekConv,
        KernelKind::SvmTheta,
        KernelKind::Size,
        KernelKind::Graphlet,
        KernelKind::RandomWalk,
        KernelKind::ShortestPath,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

/// Symmetric similarity matrix over an ordered set of graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub kind: KernelKind,
    pub graph_ids: Vec<usize>,
    pub values: DMatrix<f64>,
}

impl KernelMatrix {
    pub fn new(kind: KernelKind, graph_ids: Vec<usize>, values: DMatrix<f64>) -> Result<Self> {
        if !values.is_square() || values.nrows() != graph_ids.len() {
            return Err(Error::invalid("kernel matrix must be square and match its ids"));
        }
        let scale = values.amax().max(1.0);
        for i in 0..values.nrows() {
            for j in 0..i {
                if (values[(i, j)] - values[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::Numeric(format!("kernel not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(KernelMatrix {
            kind,
            graph_ids,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.graph_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph_ids.is_empty()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        for i in 0..self.values.nrows() {
            let row: Vec<String> = self.values.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// JSON with kind, free-form parameters, ids and row-major values.
    pub fn write_json(&self, path: &Path, params: serde_json::Value) -> Result<()> {
        let rows: Vec<Vec<f64>> = (0..self.values.nrows())
            .map(|i| self.values.row(i).iter().copied().collect())
            .collect();
        let doc = serde_json::json!({
            "kind": self.kind.name(),
            "params": params,
            "graph_ids": self.graph_ids,
            "values": rows,
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
        Ok(())
    }

    /// Inverse of the JSON layout written by [`KernelMatrix::write_json`].
    pub fn from_json_value(doc: &serde_json::Value) -> Result<Self> {
        let name = doc["kind"].as_str().unwrap_or_default();
        let kind = KernelKind::from_name(name)
            .ok_or_else(|| Error::invalid(format!("unknown kernel kind {name:?}")))?;
        let graph_ids: Vec<usize> = serde_json::from_value(doc["graph_ids"].clone())?;
        let rows: Vec<Vec<f64>> = serde_json::from_value(doc["values"].clone())?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("kernel values must form a square matrix"));
        }
        KernelMatrix::new(kind, graph_ids, DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

/// Whether the smallest eigenvalue is at least `-tol`; also returns it.
pub fn check_psd(k: &DMatrix<f64>, tol: f64) -> Result<(bool, f64)> {
    if !k.is_square() {
        return Err(Error::invalid("matrix is not square"));
    }
    if k.nrows() == 0 {
        return Ok((true, 0.0));
    }
    for i in 0..k.nrows() {
        for j in 0..i {
            if (k[(i, j)] - k[(j, i)]).abs() > 1e-9 {
                return Err(Error::invalid(format!("matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    let (values, _) = sorted_symmetric_eigen(k);
    let min = values[0];
    Ok((min >= -tol, min))
}

/// Fills a symmetric matrix from an entry function, in parallel over rows.
pub(crate) fn symmetric_from_fn<F>(m: usize, f: F) -> DMatrix<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| (0..=i).map(|j| f(i, j)).collect())
        .collect();
    let mut k = DMatrix::zeros(m, m);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// exp(−γ (|V1| − |V2|)²).
pub fn size_kernel(ds: &GraphDataset, gamma: f64) -> Result<KernelMatrix> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma must be positive"));
    }
    let sizes = ds.sizes();
    let k = symmetric_from_fn(ds.len(), |i, j| {
        let d = sizes[i] as f64 - sizes[j] as f64;
        (-gamma * d * d).exp()
    });
    KernelMatrix::new(KernelKind::Size, (0..ds.len()).collect(), k)
}
