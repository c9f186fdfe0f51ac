//! Honeycomb versus kagome walks on the triangular lattice, scored as the
//! sublattice bias p varies.

use serde::{Deserialize, Serialize};

use super::{classical_kernels, KernelSettings, OutputDir, ScoreRow};
use crate::graphs::synthetic::generate_synthetic_samples;
use crate::graphs::GraphDataset;
use crate::kernels::{check_psd, qek_matrix};
use crate::ml::{
    cross_validate, train_layer_scheme, train_pulse_duration, CvConfig, DriveConfig, LayerSchemeConfig,
};
use crate::numeric::linspace;
use crate::rydsim::{AtomRegister, NoiseModel, SimConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub p_grid: Vec<f64>,
    pub per_class: usize,
    pub n_nodes: usize,
    pub spacing_um: f64,
    pub rabi_mhz: f64,
    pub t_min_us: f64,
    pub t_max_us: f64,
    pub t_count: usize,
    /// Also train the four-layer pulse scheme.
    pub layered: bool,
    pub layer: LayerSchemeConfig,
    pub noisy: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            p_grid: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            per_class: 100,
            n_nodes: 12,
            spacing_um: 5.0,
            rabi_mhz: 2.0,
            t_min_us: 0.25,
            t_max_us: 8.0,
            t_count: 32,
            layered: false,
            layer: LayerSchemeConfig::default(),
            noisy: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthPoint {
    pub p: f64,
    pub rows: Vec<ScoreRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthResult {
    pub points: Vec<SynthPoint>,
}

impl SynthResult {
    pub fn score(&self, p: f64, kernel: &str) -> Option<f64> {
        self.points
            .iter()
            .find(|pt| (pt.p - p).abs() < 1e-12)?
            .rows
            .iter()
            .find(|r| r.kernel == kernel)
            .map(|r| r.mean_f1)
    }

    /// Best classical score at `p`.
    pub fn best_classical(&self, p: f64) -> Option<f64> {
        let pt = self.points.iter().find(|pt| (pt.p - p).abs() < 1e-12)?;
        pt.rows
            .iter()
            .filter(|r| !r.kernel.starts_with("QEK"))
            .map(|r| r.mean_f1)
            .max_by(f64::total_cmp)
    }
}

/// Scores of every kernel at one bias value.
pub fn synth_point(
    p: f64,
    config: &SynthConfig,
    kernel_settings: &KernelSettings,
    noise: &NoiseModel,
    sim: &SimConfig,
    cv: &CvConfig,
    seed: u64,
) -> Result<SynthPoint> {
    let samples = generate_synthetic_samples(p, config.per_class, config.n_nodes, seed)?;
    let registers: Vec<AtomRegister> = samples
        .iter()
        .map(|s| AtomRegister::new(s.positions(config.spacing_um)))
        .collect::<Result<_>>()?;
    let ds = GraphDataset::new(
        format!("synthetic-p{p}"),
        format!("seed {seed}"),
        samples.into_iter().map(|s| s.graph).collect(),
    );
    let labels = ds.label_signs()?;
    let noise = config.noisy.then_some(noise);

    let drive = DriveConfig { rabi_mhz: config.rabi_mhz, detuning_mhz: 0.0 };
    let t_grid = linspace(config.t_min_us, config.t_max_us, config.t_count);
    let scan = train_pulse_duration(&registers, &labels, &t_grid, &drive, noise, sim, cv)?;
    log::info!("p = {p}: QEK F1 = {:.4} at T = {}", scan.best.mean_f1, scan.best_t);
    let qek = qek_matrix(&scan.best_distributions)?;
    let mut rows = vec![ScoreRow::new("QEK", &scan.best, Some(check_psd(&qek.values, 1e-8)?.1))];
    if config.layered {
        let search = train_layer_scheme(&registers, &labels, &config.layer, noise, sim, cv, seed)?;
        let mut report = search.best.clone();
        for (i, d) in search.best_durations.iter().enumerate() {
            report.best_params.insert(format!("layer{i}_us"), *d);
        }
        rows.push(ScoreRow::new("QEK-layered", &report, None));
    }
    for k in classical_kernels(&ds, kernel_settings)? {
        let report = cross_validate(&k.values, &labels, cv)?;
        log::info!("p = {p}: {} F1 = {:.4}", k.kind.name(), report.mean_f1);
        rows.push(ScoreRow::new(k.kind.name(), &report, Some(check_psd(&k.values, 1e-8)?.1)));
    }
    Ok(SynthPoint { p, rows })
}

pub fn run_synth(
    config: &SynthConfig,
    kernel_settings: &KernelSettings,
    noise: &NoiseModel,
    sim: &SimConfig,
    cv: &CvConfig,
    seed: u64,
    out: Option<&OutputDir>,
) -> Result<SynthResult> {
    if config.p_grid.is_empty() || config.per_class == 0 {
        return Err(Error::invalid("need at least one bias value and one graph per class"));
    }
    let mut points = Vec::with_capacity(config.p_grid.len());
    for (i, &p) in config.p_grid.iter().enumerate() {
        points.push(synth_point(p, config, kernel_settings, noise, sim, cv, seed.wrapping_add(i as u64))?);
    }
    let result = SynthResult { points };
    if let Some(out) = out {
        let rows: Vec<Vec<String>> = result
            .points
            .iter()
            .flat_map(|pt| {
                pt.rows.iter().map(move |r| {
                    vec![
                        pt.p.to_string(),
                        r.kernel.clone(),
                        r.mean_f1.to_string(),
                        r.std_f1.to_string(),
                        r.best_c.to_string(),
                    ]
                })
            })
            .collect();
        out.write_csv("synth_scores.csv", &["p", "kernel", "mean_f1", "std_f1", "best_c"], &rows)?;
        out.write_json("synth.json", &result)?;
    }
    Ok(result)
}
