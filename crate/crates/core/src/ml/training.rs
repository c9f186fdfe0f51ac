//! Pulse-parameter searches scored by cross-validated QEK performance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CvConfig, ScoreReport};
use crate::kernels::{qek_matrix, DistributionSet};
use crate::rydsim::{
    apply_detection_errors_histogram, evolve_observed, excitation_distribution,
    histogram_from_probabilities, noisy_probabilities, AtomRegister, ExcitationHistogram,
    NoiseModel, Pulse, SimConfig,
};
use crate::{Error, Result};

/// Excitation histograms of every register at each observation time of one
/// pulse sequence; `out[t][g]`.
pub fn simulate_histograms(
    registers: &[AtomRegister],
    pulses: &[Pulse],
    times: &[f64],
    noise: Option<&NoiseModel>,
    sim: &SimConfig,
    seed: u64,
) -> Result<Vec<Vec<ExcitationHistogram>>> {
    let per_graph: Vec<Vec<ExcitationHistogram>> = registers
        .par_iter()
        .enumerate()
        .map(|(g, reg)| match noise.filter(|n| !n.is_noiseless()) {
            None => {
                let mut hists = Vec::with_capacity(times.len());
                evolve_observed(reg, pulses, times, sim, |_, _, s| hists.push(excitation_distribution(s)))?;
                Ok(hists)
            }
            Some(noise) => {
                let probs = noisy_probabilities(reg, pulses, times, noise, sim, seed.wrapping_add(g as u64))?;
                probs
                    .iter()
                    .map(|p| {
                        let h = histogram_from_probabilities(p, reg.qubit_count())?;
                        apply_detection_errors_histogram(&h, noise.eps, noise.eps_prime)
                    })
                    .collect()
            }
        })
        .collect::<Result<_>>()?;
    Ok((0..times.len())
        .map(|t| per_graph.iter().map(|h| h[t].clone()).collect())
        .collect())
}

fn distribution_set(hists: Vec<ExcitationHistogram>) -> Result<DistributionSet> {
    DistributionSet::new((0..hists.len()).collect(), hists)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriveConfig {
    pub rabi_mhz: f64,
    pub detuning_mhz: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            rabi_mhz: 1.0,
            detuning_mhz: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationScan {
    pub best_t: f64,
    pub best: ScoreReport,
    /// One report per entry of the requested grid, in grid order.
    pub curve: Vec<(f64, ScoreReport)>,
    pub best_distributions: DistributionSet,
}

/// Scores the QEK of a single constant pulse at every duration in `t_grid`.
/// All durations come from one evolution per graph.
pub fn train_pulse_duration(
    registers: &[AtomRegister],
    labels: &[f64],
    t_grid: &[f64],
    drive: &DriveConfig,
    noise: Option<&NoiseModel>,
    sim: &SimConfig,
    cv: &CvConfig,
) -> Result<DurationScan> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::invalid("duration grid must be non-empty and nonnegative"));
    }
    if registers.len() != labels.len() {
        return Err(Error::invalid("one label per register required"));
    }
    let unique = sorted_unique(t_grid);
    let t_max = *unique.last().unwrap();
    let pulse = Pulse::new(drive.rabi_mhz, drive.detuning_mhz, t_max)?;
    let hists = simulate_histograms(registers, &[pulse], &unique, noise, sim, cv.seed)?;
    score_duration_scan(hists, &unique, t_grid, labels, cv)
}

/// Ascending grid without repeats.
pub fn sorted_unique(grid: &[f64]) -> Vec<f64> {
    let mut unique = grid.to_vec();
    unique.sort_by(f64::total_cmp);
    unique.dedup();
    unique
}

/// Cross-validates the QEK built from `hists[k]` (histograms at
/// `times[k]`, ascending) and reports the curve over `t_grid`, whose entries
/// must all appear in `times`.
pub fn score_duration_scan(
    hists: Vec<Vec<ExcitationHistogram>>,
    times: &[f64],
    t_grid: &[f64],
    labels: &[f64],
    cv: &CvConfig,
) -> Result<DurationScan> {
    if hists.len() != times.len() || times.is_empty() {
        return Err(Error::invalid("one histogram set per observation time required"));
    }
    let mut reports = Vec::with_capacity(times.len());
    let mut sets = Vec::with_capacity(times.len());
    for (h, &t) in hists.into_iter().zip(times) {
        let set = distribution_set(h)?;
        let mut report = cross_validate(&qek_matrix(&set)?.values, labels, cv)?;
        report.best_params.insert("duration_us".into(), t);
        log::info!("T = {t:.3} µs: F1 = {:.4} ± {:.4}", report.mean_f1, report.std_f1);
        reports.push(report);
        sets.push(set);
    }
    let best = (0..times.len())
        .max_by(|&a, &b| reports[a].mean_f1.total_cmp(&reports[b].mean_f1).then(b.cmp(&a)))
        .unwrap();
    let curve = t_grid
        .iter()
        .map(|t| {
            let k = times
                .iter()
                .position(|u| u == t)
                .ok_or_else(|| Error::invalid(format!("duration {t} was not simulated")))?;
            Ok((*t, reports[k].clone()))
        })
        .collect::<Result<_>>()?;
    Ok(DurationScan {
        best_t: times[best],
        best: reports[best].clone(),
        curve,
        best_distributions: sets.swap_remove(best),
    })
}

/// Alternating drive / interaction layers with random durations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayerSchemeConfig {
    pub rabi_mhz: f64,
    pub detuning_mhz: f64,
    pub max_duration_us: f64,
    pub n_candidates: usize,
}

impl Default for LayerSchemeConfig {
    fn default() -> Self {
        LayerSchemeConfig {
            rabi_mhz: 2.0,
            detuning_mhz: 2.0,
            max_duration_us: 2.0,
            n_candidates: 500,
        }
    }
}

/// [drive t₁][interact t₂][drive t₃][interact t₄].
pub fn layer_pulses(durations: &[f64; 4], config: &LayerSchemeConfig) -> Result<Vec<Pulse>> {
    durations
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            if k % 2 == 0 {
                Pulse::new(config.rabi_mhz, 0.0, t)
            } else {
                Pulse::new(0.0, config.detuning_mhz, t)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSearch {
    pub best_durations: [f64; 4],
    pub best: ScoreReport,
    /// Every evaluated candidate with its mean F1, in sampling order.
    pub evaluated: Vec<([f64; 4], f64)>,
}

/// Random search over layer durations drawn uniformly from
/// [0, max_duration_us].
pub fn train_layer_scheme(
    registers: &[AtomRegister],
    labels: &[f64],
    config: &LayerSchemeConfig,
    noise: Option<&NoiseModel>,
    sim: &SimConfig,
    cv: &CvConfig,
    seed: u64,
) -> Result<LayerSearch> {
    if config.n_candidates == 0 || !(config.max_duration_us >= 0.0) {
        return Err(Error::invalid("need at least one candidate and a nonnegative duration bound"));
    }
    if registers.len() != labels.len() {
        return Err(Error::invalid("one label per register required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evaluated = Vec::with_capacity(config.n_candidates);
    let mut best: Option<([f64; 4], ScoreReport)> = None;
    for c in 0..config.n_candidates {
        let d: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..=config.max_duration_us));
        let pulses = layer_pulses(&d, config)?;
        let total: f64 = d.iter().sum();
        let hists = simulate_histograms(registers, &pulses, &[total], noise, sim, seed)?;
        let set = distribution_set(hists.into_iter().next().unwrap())?;
        let report = cross_validate(&qek_matrix(&set)?.values, labels, cv)?;
        log::info!("layer candidate {c}: {d:?} → F1 = {:.4}", report.mean_f1);
        evaluated.push((d, report.mean_f1));
        if best.as_ref().is_none_or(|(_, b)| report.mean_f1 > b.mean_f1) {
            best = Some((d, report));
        }
    }
    let (best_durations, mut report) = best.unwrap();
    for (k, t) in best_durations.iter().enumerate() {
        report.best_params.insert(format!("t{}_us", k + 1), *t);
    }
    Ok(LayerSearch {
        best_durations,
        best: report,
        evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rydsim::evolve_sequence;

    fn toy() -> (Vec<AtomRegister>, Vec<f64>) {
        let mut regs = Vec::new();
        let mut labels = Vec::new();
        for k in 0..10 {
            let spacing = if k % 2 == 0 { 5.0 } else { 12.0 };
            regs.push(AtomRegister::new(vec![[0.0, 0.0], [spacing, 0.0], [0.0, spacing + 0.1 * k as f64]]).unwrap());
            labels.push(if k % 2 == 0 { 1.0 } else { -1.0 });
        }
        (regs, labels)
    }

    fn quick_cv() -> CvConfig {
        CvConfig {
            repeats: 2,
            ..CvConfig::default()
        }
    }

    #[test]
    fn single_point_grid_and_duplicates() {
        let (regs, labels) = toy();
        let drive = DriveConfig::default();
        let one = train_pulse_duration(&regs, &labels, &[0.4], &drive, None, &SimConfig::default(), &quick_cv())
            .unwrap();
        assert_eq!(one.best_t, 0.4);
        let dup = train_pulse_duration(
            &regs,
            &labels,
            &[0.3, 0.4, 0.4, 0.6],
            &drive,
            None,
            &SimConfig::default(),
            &quick_cv(),
        )
        .unwrap();
        assert_eq!(dup.curve.len(), 4);
        assert_eq!(dup.curve[1].1, dup.curve[2].1);
        assert_eq!(dup.curve[1].1.mean_f1, one.best.mean_f1);
    }

    #[test]
    fn layer_search_evaluates_requested_candidates() {
        let (regs, labels) = toy();
        let cfg = LayerSchemeConfig {
            n_candidates: 1,
            ..LayerSchemeConfig::default()
        };
        let s = train_layer_scheme(&regs, &labels, &cfg, None, &SimConfig::default(), &quick_cv(), 4).unwrap();
        assert_eq!(s.evaluated.len(), 1);
        assert!(s.best_durations.iter().all(|t| (0.0..=2.0).contains(t)));
    }

    #[test]
    fn zero_duration_layers_reduce_the_sequence() {
        let (regs, _) = toy();
        let cfg = LayerSchemeConfig::default();
        let full = layer_pulses(&[0.3, 0.0, 0.2, 0.5], &cfg).unwrap();
        let reduced = [Pulse::new(2.0, 0.0, 0.5).unwrap(), Pulse::new(0.0, 2.0, 0.5).unwrap()];
        let sim = SimConfig::default();
        let a = excitation_distribution(&evolve_sequence(&regs[0], &full, &sim).unwrap());
        let b = excitation_distribution(&evolve_sequence(&regs[0], &reduced, &sim).unwrap());
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
