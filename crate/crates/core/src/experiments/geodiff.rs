//! Geometric difference between each classical kernel and the QEK, and the
//! relabeled tasks built to favour the QEK.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::OutputDir;
use crate::geometry::{default_lambda_grid, lambda_scan, relabel_dataset, LambdaScan};
use crate::kernels::KernelMatrix;
use crate::ml::{cross_validate, CvConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeodiffConfig {
    /// Regularization grid; defaults to 20 log-spaced values scaled by
    /// tr(K_C)/M.
    pub lambda_grid: Option<Vec<f64>>,
    /// Bound on the training-error term; defaults to 0.1·√M.
    pub threshold: Option<f64>,
    /// λ used for relabeling; defaults to the recommended λ of the scan.
    pub relabel_lambda: Option<f64>,
    /// Directory with kernel JSON files and `labels.json` from an earlier
    /// run; when absent the kernels are recomputed.
    pub kernels_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodiffRow {
    pub kernel: String,
    /// g(K_C‖K_Q) at the smallest λ of the grid.
    pub g12: f64,
    pub recommended_lambda: Option<f64>,
    pub relabel_lambda: f64,
    /// Relabeled targets were negated to give the QEK its better F1.
    pub flipped: bool,
    pub qek_f1: Option<f64>,
    pub classical_f1: Option<f64>,
    pub scan: LambdaScan,
}

impl GeodiffRow {
    /// QEK minus classical F1 on the relabeled task.
    pub fn gap(&self) -> Option<f64> {
        Some(self.qek_f1? - self.classical_f1?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodiffResult {
    pub qek_c: f64,
    pub rows: Vec<GeodiffRow>,
}

fn both_classes(labels: &[f64]) -> bool {
    labels.iter().any(|&y| y > 0.0) && labels.iter().any(|&y| y < 0.0)
}

/// `qek` is the quantum kernel K_Q and `qek_c` the C it was trained with on
/// the original labels; relabeled tasks score the QEK at that C only and
/// each classical kernel over the full C grid.
pub fn run_geodiff(
    qek: &KernelMatrix,
    classical: &[KernelMatrix],
    qek_c: f64,
    config: &GeodiffConfig,
    cv: &CvConfig,
    out: Option<&OutputDir>,
) -> Result<GeodiffResult> {
    if classical.iter().any(|k| k.len() != qek.len()) {
        return Err(Error::invalid("all kernels must cover the same graphs"));
    }
    let fixed = CvConfig { c_grid: vec![qek_c], ..cv.clone() };
    let mut rows = Vec::with_capacity(classical.len());
    for k in classical {
        let name = k.kind.name();
        let grid = config.lambda_grid.clone().unwrap_or_else(|| default_lambda_grid(&k.values));
        let scan = lambda_scan(&k.values, &qek.values, &grid, config.threshold)?;
        let smallest = scan
            .rows
            .iter()
            .min_by(|a, b| a.lambda.total_cmp(&b.lambda))
            .ok_or_else(|| Error::invalid("lambda grid is empty"))?;
        let relabel_lambda = config.relabel_lambda.or(scan.recommended).unwrap_or(smallest.lambda);
        let relabeled = relabel_dataset(&k.values, &qek.values, relabel_lambda)?;
        let (mut qek_f1, mut classical_f1, mut flipped) = (None, None, false);
        if both_classes(&relabeled.labels) {
            let plus = cross_validate(&qek.values, &relabeled.labels, &fixed)?.mean_f1;
            let negated: Vec<f64> = relabeled.labels.iter().map(|y| -y).collect();
            let minus = cross_validate(&qek.values, &negated, &fixed)?.mean_f1;
            flipped = minus > plus;
            let targets = if flipped { &negated } else { &relabeled.labels };
            qek_f1 = Some(plus.max(minus));
            classical_f1 = Some(cross_validate(&k.values, targets, cv)?.mean_f1);
        } else {
            log::warn!("relabeling against {name} produced a single class");
        }
        log::info!(
            "{name}: g12 = {:.3}, relabeled F1 QEK {:?} vs {:?}",
            smallest.g12,
            qek_f1,
            classical_f1
        );
        rows.push(GeodiffRow {
            kernel: name.to_string(),
            g12: smallest.g12,
            recommended_lambda: scan.recommended,
            relabel_lambda,
            flipped,
            qek_f1,
            classical_f1,
            scan,
        });
    }
    let result = GeodiffResult { qek_c, rows };
    if let Some(out) = out {
        write_outputs(&result, out)?;
    }
    Ok(result)
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

fn write_outputs(r: &GeodiffResult, out: &OutputDir) -> Result<()> {
    for row in &r.rows {
        let scan: Vec<Vec<String>> = row
            .scan
            .rows
            .iter()
            .map(|s| vec![s.lambda.to_string(), s.g12.to_string(), s.g_tra.to_string()])
            .collect();
        out.write_csv(&format!("geodiff_scan_{}.csv", row.kernel), &["lambda", "g12", "g_tra"], &scan)?;
    }
    let summary: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                row.kernel.clone(),
                row.g12.to_string(),
                opt(row.recommended_lambda),
                row.relabel_lambda.to_string(),
                opt(row.qek_f1),
                opt(row.classical_f1),
                opt(row.gap()),
            ]
        })
        .collect();
    out.write_csv(
        "geodiff.csv",
        &["kernel", "g12", "recommended_lambda", "relabel_lambda", "qek_f1", "classical_f1", "gap"],
        &summary,
    )?;
    out.write_json("geodiff.json", r)?;
    Ok(())
}
