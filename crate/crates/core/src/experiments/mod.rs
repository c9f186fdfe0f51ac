//! End-to-end experiment pipelines driven by serializable configs. Every
//! artifact they write carries the config hash and seed of the run.

mod geodiff;
mod output;
mod ptcfm;
mod synth;
mod wl_demo;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::graphs::GraphDataset;
use crate::kernels::{
    graphlet_sampling_kernel, random_walk_kernel, shortest_path_kernel, size_kernel,
    svm_theta_kernel, GraphletConfig, KernelMatrix, RandomWalkLambda, SvmThetaConfig,
};
use crate::layout::{LayoutConfig, SlmConfig};
use crate::ml::{CvConfig, ScoreReport};
use crate::rydsim::{NoiseModel, SimConfig};
use crate::Result;

pub use geodiff::{run_geodiff, GeodiffConfig, GeodiffResult, GeodiffRow};
pub use output::{read_json_data, OutputDir};
pub use ptcfm::{embed_dataset, load_ptcfm_run, run_ptcfm, EmbeddedGraph, PtcFmConfig, PtcFmResult};
pub use synth::{run_synth, synth_point, SynthConfig, SynthPoint, SynthResult};
pub use wl_demo::{run_wl_demo, WlDemoConfig, WlDemoResult};

/// Hyperparameters of the classical baseline kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelSettings {
    pub size_gamma: f64,
    pub shortest_path_c: f64,
    pub random_walk: RandomWalkLambda,
    pub graphlet: GraphletConfig,
    pub svm_theta: SvmThetaConfig,
}

impl Default for KernelSettings {
    fn default() -> Self {
        KernelSettings {
            size_gamma: 0.1,
            shortest_path_c: 5.0,
            random_walk: RandomWalkLambda::default(),
            graphlet: GraphletConfig::default(),
            svm_theta: SvmThetaConfig::default(),
        }
    }
}

/// SVM-ϑ, Size, GS, RW and SP kernels, in that order.
pub fn classical_kernels(ds: &GraphDataset, settings: &KernelSettings) -> Result<Vec<KernelMatrix>> {
    Ok(vec![
        svm_theta_kernel(ds, &settings.svm_theta)?,
        size_kernel(ds, settings.size_gamma)?,
        graphlet_sampling_kernel(ds, &settings.graphlet)?,
        random_walk_kernel(ds, settings.random_walk)?,
        shortest_path_kernel(ds, settings.shortest_path_c)?,
    ])
}

/// One line of a score table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub kernel: String,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub best_c: f64,
    /// Smallest kernel eigenvalue, when the matrix was formed.
    pub min_eigenvalue: Option<f64>,
    pub params: std::collections::BTreeMap<String, f64>,
}

impl ScoreRow {
    pub fn new(kernel: impl Into<String>, report: &ScoreReport, min_eigenvalue: Option<f64>) -> Self {
        ScoreRow {
            kernel: kernel.into(),
            mean_f1: report.mean_f1,
            std_f1: report.std_f1,
            best_c: report.best_c,
            min_eigenvalue,
            params: report.best_params.clone(),
        }
    }
}

/// Everything a run can be configured with; each subcommand reads its own
/// section plus the shared ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub sim: SimConfig,
    pub noise: NoiseModel,
    pub cv: CvConfig,
    pub kernels: KernelSettings,
    pub layout: LayoutConfig,
    pub slm: SlmConfig,
    pub wl_demo: WlDemoConfig,
    pub ptcfm: PtcFmConfig,
    pub synth: SynthConfig,
    pub geodiff: GeodiffConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            sim: SimConfig::default(),
            noise: NoiseModel::default(),
            cv: CvConfig::default(),
            kernels: KernelSettings::default(),
            layout: LayoutConfig::default(),
            slm: SlmConfig::default(),
            wl_demo: WlDemoConfig::default(),
            ptcfm: PtcFmConfig::default(),
            synth: SynthConfig::default(),
            geodiff: GeodiffConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Sets the run seed and every per-stage seed derived from it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.cv.seed = seed;
        self.kernels.graphlet.seed = seed;
        self.kernels.svm_theta.seed = seed;
        self.slm.seed = seed;
        self
    }
}
