//! Two graphs that 1-WL cannot tell apart, told apart by their excitation
//! statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::OutputDir;
use crate::graphs::{locally_equivalent_pair, locally_equivalent_pair_positions, node_classes, Graph, NodeClass};
use crate::kernels::js_divergence;
use crate::numeric::linspace;
use crate::rydsim::{
    apply_detection_errors_counts, mean_field_evolve, noisy_probabilities, sample_from_probabilities,
    AtomRegister, NoiseModel, Pulse, SimConfig,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WlDemoConfig {
    pub rabi_mhz: f64,
    pub detuning_mhz: f64,
    pub t_max_us: f64,
    pub n_times: usize,
    pub shots: usize,
    pub spacing_um: f64,
    /// Drop dephasing and readout errors.
    pub noiseless: bool,
    /// Run the pair in the order (G2, G1).
    pub swap_graphs: bool,
}

impl Default for WlDemoConfig {
    fn default() -> Self {
        WlDemoConfig {
            rabi_mhz: 1.0,
            detuning_mhz: 0.7,
            t_max_us: 2.5,
            n_times: 126,
            shots: 600,
            spacing_um: 5.3,
            noiseless: false,
            swap_graphs: false,
        }
    }
}

/// Curves indexed like `times`; the per-graph vectors follow the run order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WlDemoResult {
    pub times: Vec<f64>,
    pub js: Vec<f64>,
    pub n_border: [Vec<f64>; 2],
    pub n_center: [Vec<f64>; 2],
    pub mean_field_border: [Vec<f64>; 2],
    pub mean_field_center: [Vec<f64>; 2],
    pub mean_field_nn_border: [Vec<f64>; 2],
    pub mean_field_nn_center: [Vec<f64>; 2],
    pub t_star: f64,
    pub js_max: f64,
}

fn class_mean(occ: &[f64], classes: &[NodeClass], class: NodeClass) -> f64 {
    let picked: Vec<f64> = occ
        .iter()
        .zip(classes)
        .filter(|(_, c)| **c == class)
        .map(|(o, _)| *o)
        .collect();
    picked.iter().sum::<f64>() / picked.len().max(1) as f64
}

struct Curves {
    hists: Vec<Vec<f64>>,
    border: Vec<f64>,
    center: Vec<f64>,
}

fn sampled_curves(
    g: &Graph,
    reg: &AtomRegister,
    pulse: &Pulse,
    times: &[f64],
    noise: &NoiseModel,
    shots: usize,
    sim: &SimConfig,
    seed: u64,
) -> Result<Curves> {
    let n = g.node_count();
    let classes = node_classes(g);
    let probs = noisy_probabilities(reg, std::slice::from_ref(pulse), times, noise, sim, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut out = Curves {
        hists: Vec::new(),
        border: Vec::new(),
        center: Vec::new(),
    };
    for p in &probs {
        let clean = sample_from_probabilities(p, n, shots, rng.random())?;
        let counts = apply_detection_errors_counts(&clean, noise.eps, noise.eps_prime, rng.random())?;
        let occ = counts.mean_occupations();
        out.hists.push(counts.to_histogram()?.probs);
        out.border.push(class_mean(&occ, &classes, NodeClass::Border));
        out.center.push(class_mean(&occ, &classes, NodeClass::Center));
    }
    Ok(out)
}

fn mean_field_curves(
    g: &Graph,
    reg: &AtomRegister,
    pulse: &Pulse,
    times: &[f64],
    nn_only: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let classes = node_classes(g);
    let tr = mean_field_evolve(reg, pulse, times, nn_only.then_some(g))?;
    Ok(tr
        .occupations
        .iter()
        .map(|occ| {
            (
                class_mean(occ, &classes, NodeClass::Border),
                class_mean(occ, &classes, NodeClass::Center),
            )
        })
        .unzip())
}

pub fn run_wl_demo(
    config: &WlDemoConfig,
    noise: &NoiseModel,
    sim: &SimConfig,
    seed: u64,
    out: Option<&OutputDir>,
) -> Result<WlDemoResult> {
    if config.n_times < 2 || config.shots == 0 {
        return Err(Error::invalid("need at least two time points and one shot"));
    }
    let noise = if config.noiseless { NoiseModel::noiseless() } else { *noise };
    let (g1, g2) = locally_equivalent_pair();
    let (p1, p2) = locally_equivalent_pair_positions();
    let scale = |ps: Vec<[f64; 2]>| -> Vec<[f64; 2]> {
        ps.into_iter().map(|[x, y]| [x * config.spacing_um, y * config.spacing_um]).collect()
    };
    let mut pair = vec![(g1, AtomRegister::new(scale(p1))?), (g2, AtomRegister::new(scale(p2))?)];
    if config.swap_graphs {
        pair.reverse();
    }
    let times = linspace(0.0, config.t_max_us, config.n_times);
    let pulse = Pulse::new(config.rabi_mhz, config.detuning_mhz, config.t_max_us)?;

    let mut curves = Vec::new();
    let mut mf = Vec::new();
    let mut mf_nn = Vec::new();
    for (k, (g, reg)) in pair.iter().enumerate() {
        // The stream is tied to the graph, not to its position in the run.
        let graph_seed = seed.wrapping_mul(2).wrapping_add((k != config.swap_graphs as usize) as u64);
        curves.push(sampled_curves(g, reg, &pulse, &times, &noise, config.shots, sim, graph_seed)?);
        mf.push(mean_field_curves(g, reg, &pulse, &times, false)?);
        mf_nn.push(mean_field_curves(g, reg, &pulse, &times, true)?);
    }
    let js: Vec<f64> = curves[0]
        .hists
        .iter()
        .zip(&curves[1].hists)
        .map(|(a, b)| js_divergence(a, b))
        .collect::<Result<_>>()?;
    let peak = (0..js.len()).max_by(|&a, &b| js[a].total_cmp(&js[b])).unwrap();
    let [c1, c2]: [Curves; 2] = curves.try_into().ok().unwrap();
    let [m1, m2]: [(Vec<f64>, Vec<f64>); 2] = mf.try_into().ok().unwrap();
    let [n1, n2]: [(Vec<f64>, Vec<f64>); 2] = mf_nn.try_into().ok().unwrap();
    let result = WlDemoResult {
        t_star: times[peak],
        js_max: js[peak],
        times,
        js,
        n_border: [c1.border, c2.border],
        n_center: [c1.center, c2.center],
        mean_field_border: [m1.0, m2.0],
        mean_field_center: [m1.1, m2.1],
        mean_field_nn_border: [n1.0, n2.0],
        mean_field_nn_center: [n1.1, n2.1],
    };
    if let Some(out) = out {
        write_outputs(&result, out)?;
    }
    Ok(result)
}

fn write_outputs(r: &WlDemoResult, out: &OutputDir) -> Result<()> {
    let header = [
        "t", "js", "nB_a", "nB_b", "nC_a", "nC_b", "mf_nB_a", "mf_nB_b", "mf_nC_a", "mf_nC_b",
        "mfnn_nB_a", "mfnn_nB_b", "mfnn_nC_a", "mfnn_nC_b",
    ];
    let rows: Vec<Vec<String>> = (0..r.times.len())
        .map(|k| {
            [
                r.times[k],
                r.js[k],
                r.n_border[0][k],
                r.n_border[1][k],
                r.n_center[0][k],
                r.n_center[1][k],
                r.mean_field_border[0][k],
                r.mean_field_border[1][k],
                r.mean_field_center[0][k],
                r.mean_field_center[1][k],
                r.mean_field_nn_border[0][k],
                r.mean_field_nn_border[1][k],
                r.mean_field_nn_center[0][k],
                r.mean_field_nn_center[1][k],
            ]
            .iter()
            .map(|x| x.to_string())
            .collect()
        })
        .collect();
    out.write_csv("wl_demo_curves.csv", &header, &rows)?;
    out.write_json("wl_demo.json", r)?;
    Ok(())
}
