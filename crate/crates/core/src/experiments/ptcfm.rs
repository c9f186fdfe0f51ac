//! Molecule classification pipeline: load, truncate, embed, simulate, build
//! kernels, cross-validate.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::read_json_data;
use super::{classical_kernels, KernelSettings, OutputDir, ScoreRow};
use crate::graphs::{load_tudataset, size_histogram, truncate_dataset, Graph, GraphDataset};
use crate::kernels::{
    check_psd, qek_matrix, qek_size_compensated, rabi_excitation_probability, KernelMatrix,
};
use crate::layout::{
    batch_to_slm, cluster_dataset, fruchterman_reingold, interaction_ratio, optimize_ud_layout,
    Layout, LayoutConfig, SimilarityWeights, SlmConfig, SlmPattern,
};
use crate::ml::{cross_validate, score_duration_scan, simulate_histograms, sorted_unique, CvConfig};
use crate::numeric::linspace;
use crate::rydsim::{AtomRegister, ExcitationHistogram, NoiseModel, Pulse, SimConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PtcFmConfig {
    /// Directory holding the TU-format `*_A.txt`, `*_graph_indicator.txt`
    /// and `*_graph_labels.txt` files.
    pub data_dir: PathBuf,
    /// Largest graph kept; defaults to the simulation qubit ceiling.
    pub max_nodes: Option<usize>,
    pub rabi_mhz: f64,
    pub t_min_us: f64,
    pub t_max_us: f64,
    pub t_count: usize,
    /// Simulate with dephasing and readout errors.
    pub noisy: bool,
    pub size_compensated: bool,
    /// Snap layouts onto shared trap patterns before simulating.
    pub batching: bool,
    pub n_batches: usize,
    pub cluster_alpha: f64,
    /// Reuse layouts and histograms cached under `<out_dir>/cache` when their
    /// inputs are unchanged.
    pub use_cache: bool,
}

impl Default for PtcFmConfig {
    fn default() -> Self {
        PtcFmConfig {
            data_dir: PathBuf::from("data/PTC_FM"),
            max_nodes: None,
            rabi_mhz: 1.0,
            t_min_us: 0.1,
            t_max_us: 2.5,
            t_count: 25,
            noisy: false,
            size_compensated: true,
            batching: false,
            n_batches: 6,
            cluster_alpha: 0.5,
            use_cache: true,
        }
    }
}

impl PtcFmConfig {
    pub fn t_grid(&self) -> Vec<f64> {
        linspace(self.t_min_us, self.t_max_us, self.t_count)
    }
}

/// Force-directed start and optimized layout of one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedGraph {
    pub initial: Layout,
    pub layout: Layout,
    pub ratio_before: f64,
    pub ratio_after: f64,
}

/// Lays out every graph (in parallel): force-directed start, then the
/// ratio-preserving coordinate optimizer.
pub fn embed_dataset(ds: &GraphDataset, config: &LayoutConfig, seed: u64) -> Result<Vec<EmbeddedGraph>> {
    ds.graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let initial = fruchterman_reingold(g, seed.wrapping_add(i as u64), config.fr_iterations, Some(config.nn_distance_um))?;
            let layout = optimize_ud_layout(g, &initial, config)?;
            Ok(EmbeddedGraph {
                ratio_before: interaction_ratio(g, &initial)?.ratio,
                ratio_after: interaction_ratio(g, &layout)?.ratio,
                initial,
                layout,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtcFmResult {
    pub n_graphs: usize,
    pub labels: Vec<f64>,
    pub best_t: f64,
    /// (T, mean F1, std F1) for every duration of the grid.
    pub duration_curve: Vec<(f64, f64, f64)>,
    pub rows: Vec<ScoreRow>,
    /// C selected for the QEK at the best duration.
    pub qek_c: f64,
    #[serde(skip)]
    pub kernels: Vec<KernelMatrix>,
}

#[derive(Serialize, Deserialize)]
struct HistogramCache {
    key: serde_json::Value,
    times: Vec<f64>,
    histograms: Vec<Vec<ExcitationHistogram>>,
}

#[derive(Serialize, Deserialize)]
struct LayoutCache {
    key: serde_json::Value,
    embedded: Vec<EmbeddedGraph>,
}

fn load_cache<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Option<T> {
    read_json_data(path).ok().map(|(_, d)| d)
}

/// Snaps each cluster of graphs onto one trap pattern. Graphs that cannot
/// be placed keep their free-space layout.
fn batch_layouts(
    ds: &GraphDataset,
    layouts: &[Layout],
    config: &PtcFmConfig,
    slm: &SlmConfig,
    seed: u64,
) -> Result<(Vec<Vec<[f64; 2]>>, Vec<SlmPattern>)> {
    let clusters = cluster_dataset(
        ds,
        config.n_batches.min(ds.len()),
        config.cluster_alpha,
        &SimilarityWeights::default(),
        seed,
    )?;
    let mut positions: Vec<Vec<[f64; 2]>> = layouts.iter().map(|l| l.positions.clone()).collect();
    let mut patterns = Vec::new();
    for members in clusters {
        let mut batch: Vec<(usize, &Graph, &Layout)> =
            members.iter().map(|&i| (i, &ds.graphs[i], &layouts[i])).collect();
        let pattern = loop {
            match batch_to_slm(&batch, slm) {
                Ok(p) => break Some(p),
                Err(Error::Placement { graph_id, reason }) => {
                    log::warn!("graph {graph_id} left out of its batch: {reason}");
                    batch.retain(|b| b.0 != graph_id);
                    if batch.is_empty() {
                        break None;
                    }
                }
                Err(e) => return Err(e),
            }
        };
        if let Some(p) = pattern {
            for &id in p.assignments.keys() {
                positions[id] = p.positions(id).expect("assigned graph");
            }
            if !p.defects.is_empty() {
                log::warn!("graphs {:?} are embedded with defects", p.defects);
            }
            patterns.push(p);
        }
    }
    Ok((positions, patterns))
}

fn dataset_key(ds: &GraphDataset) -> serde_json::Value {
    serde_json::json!(ds
        .graphs
        .iter()
        .map(|g| (g.node_count(), g.edges().to_vec(), g.label().map(|l| l.sign())))
        .collect::<Vec<_>>())
}

#[allow(clippy::too_many_arguments)]
pub fn run_ptcfm(
    config: &PtcFmConfig,
    layout_cfg: &LayoutConfig,
    slm: &SlmConfig,
    kernel_settings: &KernelSettings,
    noise: &NoiseModel,
    sim: &SimConfig,
    cv: &CvConfig,
    seed: u64,
    out: &OutputDir,
) -> Result<PtcFmResult> {
    let full = load_tudataset(&config.data_dir)?;
    let max_nodes = config.max_nodes.unwrap_or(sim.qubit_ceiling);
    let ds = truncate_dataset(&full, max_nodes)?;
    log::info!("{} of {} graphs have at most {max_nodes} nodes", ds.len(), full.len());
    let labels = ds.label_signs()?;
    let hist_rows: Vec<Vec<String>> = size_histogram(&ds)?
        .iter()
        .map(|(n, c)| vec![n.to_string(), c.positive.to_string(), c.negative.to_string()])
        .collect();
    out.write_csv("size_histogram.csv", &["nodes", "positive", "negative"], &hist_rows)?;

    let cache_dir = out.path("cache");
    std::fs::create_dir_all(&cache_dir)?;
    let cache_out = OutputDir::create(&cache_dir, out.config_hash(), out.seed())?;

    let layout_key = serde_json::json!({ "data": dataset_key(&ds), "layout": layout_cfg, "seed": seed });
    let embedded = match load_cache::<LayoutCache>(&cache_dir.join("layouts.json"))
        .filter(|c| config.use_cache && c.key == layout_key)
    {
        Some(c) => c.embedded,
        None => {
            let e = embed_dataset(&ds, layout_cfg, seed)?;
            cache_out.write_json("layouts.json", &LayoutCache { key: layout_key.clone(), embedded: e.clone() })?;
            e
        }
    };
    let ratio_rows: Vec<Vec<String>> = embedded
        .iter()
        .enumerate()
        .map(|(i, e)| vec![i.to_string(), e.ratio_before.to_string(), e.ratio_after.to_string()])
        .collect();
    out.write_csv("layout_ratios.csv", &["graph_id", "ratio_before", "ratio_after"], &ratio_rows)?;

    let layouts: Vec<Layout> = embedded.iter().map(|e| e.layout.clone()).collect();
    let positions = if config.batching {
        let (positions, patterns) = batch_layouts(&ds, &layouts, config, slm, seed)?;
        out.write_json("slm_patterns.json", &patterns)?;
        positions
    } else {
        layouts.iter().map(|l| l.positions.clone()).collect()
    };
    let registers: Vec<AtomRegister> = positions.into_iter().map(AtomRegister::new).collect::<Result<_>>()?;

    let t_grid = config.t_grid();
    let times = sorted_unique(&t_grid);
    let noise_used = config.noisy.then_some(noise);
    let hist_key = serde_json::json!({
        "layout": layout_key,
        "batching": config.batching,
        "slm": slm,
        "rabi": config.rabi_mhz,
        "times": times,
        "noise": noise_used,
        "sim": sim,
        "seed": seed,
    });
    let hists = match load_cache::<HistogramCache>(&cache_dir.join("histograms.json"))
        .filter(|c| config.use_cache && c.key == hist_key)
    {
        Some(c) => {
            log::info!("reusing cached histograms");
            c.histograms
        }
        None => {
            let pulse = Pulse::new(config.rabi_mhz, 0.0, *times.last().unwrap())?;
            let h = simulate_histograms(&registers, &[pulse], &times, noise_used, sim, seed)?;
            cache_out.write_json(
                "histograms.json",
                &HistogramCache { key: hist_key, times: times.clone(), histograms: h.clone() },
            )?;
            h
        }
    };

    let scan = score_duration_scan(hists, &times, &t_grid, &labels, cv)?;
    let duration_curve: Vec<(f64, f64, f64)> =
        scan.curve.iter().map(|(t, r)| (*t, r.mean_f1, r.std_f1)).collect();
    out.write_csv(
        "duration_curve.csv",
        &["t_us", "mean_f1", "std_f1"],
        &duration_curve.iter().map(|(t, m, s)| vec![t.to_string(), m.to_string(), s.to_string()]).collect::<Vec<_>>(),
    )?;

    let qek = qek_matrix(&scan.best_distributions)?;
    let mut rows = vec![ScoreRow::new("QEK", &scan.best, Some(check_psd(&qek.values, 1e-8)?.1))];
    let mut kernels = vec![qek];
    if config.size_compensated {
        let p = rabi_excitation_probability(config.rabi_mhz, scan.best_t)?;
        let conv = qek_size_compensated(&scan.best_distributions, p)?;
        let mut report = cross_validate(&conv.values, &labels, cv)?;
        report.best_params.insert("duration_us".into(), scan.best_t);
        report.best_params.insert("p".into(), p);
        rows.push(ScoreRow::new("QEK-conv", &report, Some(check_psd(&conv.values, 1e-8)?.1)));
        kernels.push(conv);
    }
    for k in classical_kernels(&ds, kernel_settings)? {
        let report = cross_validate(&k.values, &labels, cv)?;
        log::info!("{}: F1 = {:.4} ± {:.4}", k.kind.name(), report.mean_f1, report.std_f1);
        rows.push(ScoreRow::new(k.kind.name(), &report, Some(check_psd(&k.values, 1e-8)?.1)));
        kernels.push(k);
    }
    for k in &kernels {
        out.write_kernel(&format!("kernel_{}", k.kind.name()), k, serde_json::json!({}))?;
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.kernel.clone(),
                r.mean_f1.to_string(),
                r.std_f1.to_string(),
                r.best_c.to_string(),
                r.min_eigenvalue.map_or(String::new(), |v| v.to_string()),
            ]
        })
        .collect();
    out.write_csv("scores.csv", &["kernel", "mean_f1", "std_f1", "best_c", "min_eigenvalue"], &table)?;
    let result = PtcFmResult {
        n_graphs: ds.len(),
        labels,
        best_t: scan.best_t,
        duration_curve,
        rows,
        qek_c: scan.best.best_c,
        kernels,
    };
    out.write_json("ptcfm.json", &result)?;
    Ok(result)
}

/// Reads back a run written by [`run_ptcfm`], kernel matrices included.
pub fn load_ptcfm_run(dir: &std::path::Path) -> Result<PtcFmResult> {
    let (_, mut result): (_, PtcFmResult) = read_json_data(&dir.join("ptcfm.json"))?;
    result.kernels = result
        .rows
        .iter()
        .map(|r| {
            let (_, doc): (_, serde_json::Value) = read_json_data(&dir.join(format!("kernel_{}.json", r.kernel)))?;
            KernelMatrix::from_json_value(&doc)
        })
        .collect::<Result<_>>()?;
    Ok(result)
}
