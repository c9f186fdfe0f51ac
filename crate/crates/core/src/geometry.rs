//! Geometric difference between two kernels over the same graphs, its
//! regularized form, the matching training-error bound, and relabeling
//! towards maximal separation.
//!
//! Throughout, `k1` is the kernel whose feature space must replicate `k2`:
//! g₁₂ = √‖√K₂ K₁⁻¹ √K₂‖ is large when labels that are easy for K₂ are hard
//! for K₁.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::{logspace, sorted_symmetric_eigen};
use crate::{Error, Result};

const CLIP_TOL: f64 = 1e-6;
const SINGULAR_RATIO: f64 = 1e-10;
const DEGENERACY_GAP: f64 = 1e-10;

fn check_square(k: &DMatrix<f64>) -> Result<()> {
    if !k.is_square() || k.nrows() == 0 {
        return Err(Error::invalid("kernel must be a non-empty square matrix"));
    }
    Ok(())
}

fn check_pair(k1: &DMatrix<f64>, k2: &DMatrix<f64>) -> Result<()> {
    check_square(k1)?;
    check_square(k2)?;
    if k1.shape() != k2.shape() {
        return Err(Error::invalid("kernels cover different numbers of graphs"));
    }
    Ok(())
}

/// Eigenvalues clipped at zero; anything below −1e−6 is rejected.
fn psd_eigen(k: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (values, vectors) = sorted_symmetric_eigen(k);
    if values[0] < -CLIP_TOL {
        return Err(Error::NotPsd(values[0]));
    }
    Ok((values.into_iter().map(|v| v.max(0.0)).collect(), vectors))
}

fn spectral_function(values: &[f64], vectors: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let d = DVector::from_iterator(values.len(), values.iter().map(|&v| f(v)));
    let scaled = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| vectors[(r, c)] * d[c]);
    let out = scaled * vectors.transpose();
    (&out + out.transpose()) * 0.5
}

/// Symmetric PSD square root via the eigendecomposition.
pub fn matrix_sqrt_psd(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(k)?;
    let (values, vectors) = psd_eigen(k)?;
    Ok(spectral_function(&values, &vectors, f64::sqrt))
}

fn top_eigen(m: &DMatrix<f64>) -> (f64, DVector<f64>, f64) {
    let (values, vectors) = sorted_symmetric_eigen(m);
    let n = values.len();
    let gap = if n > 1 { values[n - 1] - values[n - 2] } else { f64::INFINITY };
    (values[n - 1].max(0.0), vectors.column(n - 1).into_owned(), gap)
}

/// √‖√K₂ K₁⁻¹ √K₂‖ for invertible K₁.
pub fn geometric_difference(k1: &DMatrix<f64>, k2: &DMatrix<f64>) -> Result<f64> {
    check_pair(k1, k2)?;
    let (values, _) = psd_eigen(k1)?;
    let max = values[values.len() - 1];
    if values[0] <= SINGULAR_RATIO * max {
        return Err(Error::Singular);
    }
    Ok(GeoDiff::new(k1, k2)?.report(0.0).g12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoDiffReport {
    pub g12: f64,
    pub lambda: f64,
    pub g_tra: f64,
    /// Top eigenvector of √K₂ √K₁ (K₁+λ)⁻² √K₁ √K₂, largest entry positive.
    pub top_eigvec: Vec<f64>,
    /// Gap between the two largest eigenvalues of that matrix.
    pub eigen_gap: f64,
}

/// Shared decompositions for evaluating many λ on one kernel pair.
pub struct GeoDiff {
    k1_values: Vec<f64>,
    k1_vectors: DMatrix<f64>,
    sqrt_k2: DMatrix<f64>,
}

impl GeoDiff {
    pub fn new(k1: &DMatrix<f64>, k2: &DMatrix<f64>) -> Result<Self> {
        check_pair(k1, k2)?;
        let (k1_values, k1_vectors) = psd_eigen(k1)?;
        Ok(GeoDiff {
            k1_values,
            k1_vectors,
            sqrt_k2: matrix_sqrt_psd(k2)?,
        })
    }

    pub fn size(&self) -> usize {
        self.k1_values.len()
    }

    fn sandwich(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let inner = spectral_function(&self.k1_values, &self.k1_vectors, f);
        &self.sqrt_k2 * inner * &self.sqrt_k2
    }

    /// g₁₂(λ), g_tra(λ) and the top eigenvector. At λ = 0 zero eigenvalues
    /// of K₁ drop out (pseudo-inverse).
    pub fn report(&self, lambda: f64) -> GeoDiffReport {
        let inner = self.sandwich(|v| {
            let d = v + lambda;
            if d > 0.0 {
                v / (d * d)
            } else {
                0.0
            }
        });
        let (top, mut vec, gap) = top_eigen(&inner);
        let lead = vec.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            vec.neg_mut();
        }
        GeoDiffReport {
            g12: top.sqrt(),
            lambda,
            g_tra: self.training_error_bound(lambda),
            top_eigvec: vec.iter().copied().collect(),
            eigen_gap: gap,
        }
    }

    /// λ √‖√K₂ (K₁+λ)⁻² √K₂‖.
    pub fn training_error_bound(&self, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        let inner = self.sandwich(|v| 1.0 / (v + lambda).powi(2));
        let (top, _, _) = top_eigen(&inner);
        lambda * top.sqrt()
    }
}

pub fn geometric_difference_reg(k1: &DMatrix<f64>, k2: &DMatrix<f64>, lambda: f64) -> Result<GeoDiffReport> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid("lambda must be nonnegative"));
    }
    Ok(GeoDiff::new(k1, k2)?.report(lambda))
}

pub fn training_error_bound(k1: &DMatrix<f64>, k2: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid("lambda must be nonnegative"));
    }
    Ok(GeoDiff::new(k1, k2)?.training_error_bound(lambda))
}

/// 20 log-spaced values in [1e−6, 1e2] · tr(K₁)/M.
pub fn default_lambda_grid(k1: &DMatrix<f64>) -> Vec<f64> {
    let scale = k1.trace() / k1.nrows() as f64;
    logspace(1e-6 * scale, 1e2 * scale, 20)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub g12: f64,
    pub g_tra: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaScan {
    pub rows: Vec<ScanRow>,
    pub threshold: f64,
    /// Largest λ whose training-error bound stays within the threshold.
    pub recommended: Option<f64>,
}

impl LambdaScan {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "lambda,g12,g_tra")?;
        for r in &self.rows {
            writeln!(f, "{},{},{}", r.lambda, r.g12, r.g_tra)?;
        }
        Ok(())
    }
}

/// Scans g₁₂ and g_tra over `grid`; `threshold` defaults to 0.1·√M.
pub fn lambda_scan(k1: &DMatrix<f64>, k2: &DMatrix<f64>, grid: &[f64], threshold: Option<f64>) -> Result<LambdaScan> {
    if grid.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::invalid("lambda grid must be nonnegative"));
    }
    let gd = GeoDiff::new(k1, k2)?;
    let threshold = threshold.unwrap_or(0.1 * (gd.size() as f64).sqrt());
    let rows: Vec<ScanRow> = grid
        .par_iter()
        .map(|&lambda| {
            let r = gd.report(lambda);
            ScanRow {
                lambda,
                g12: r.g12,
                g_tra: r.g_tra,
            }
        })
        .collect();
    let recommended = rows
        .iter()
        .filter(|r| r.g_tra <= threshold)
        .map(|r| r.lambda)
        .max_by(f64::total_cmp);
    Ok(LambdaScan {
        rows,
        threshold,
        recommended,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relabeling {
    /// √K_Q v before binarization.
    pub raw: Vec<f64>,
    pub labels: Vec<f64>,
    pub lambda: f64,
    pub g12: f64,
    pub degenerate: bool,
}

/// New labels √K_Q v from the top eigenvector v of the regularized
/// geometric-difference matrix of (K_C, K_Q), made binary by the sign
/// after subtracting the median (ties to +1).
pub fn relabel_dataset(k_c: &DMatrix<f64>, k_q: &DMatrix<f64>, lambda: f64) -> Result<Relabeling> {
    let report = geometric_difference_reg(k_c, k_q, lambda)?;
    let degenerate = report.eigen_gap < DEGENERACY_GAP;
    if degenerate {
        log::warn!(
            "top eigenvalue is degenerate (gap {:e}); relabeling picks one vector of the eigenspace",
            report.eigen_gap
        );
    }
    let sqrt_q = matrix_sqrt_psd(k_q)?;
    let raw: Vec<f64> = (sqrt_q * DVector::from_vec(report.top_eigvec)).iter().copied().collect();
    let mut sorted = raw.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    let labels = raw.iter().map(|&y| if y - median >= 0.0 { 1.0 } else { -1.0 }).collect();
    Ok(Relabeling {
        raw,
        labels,
        lambda,
        g12: report.g12,
        degenerate,
    })
}
