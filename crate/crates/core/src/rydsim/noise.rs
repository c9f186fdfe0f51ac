//! Dephasing by stochastic unravelling.
//!
//! The Lindblad operator √γ n̂ on each atom is equivalent to random σz kicks
//! arriving as a Poisson process of rate γ/4 per atom: the ensemble average
//! of a kicked trajectory reproduces the master equation exactly, and single
//! atom coherences decay as e^{−γt/2}.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use super::krylov::run_with_stops;
use super::measure::{apply_detection_errors_histogram, histogram_from_probabilities};
use super::{angular, AtomRegister, ExcitationHistogram, NoiseModel, Pulse, SimConfig};
use crate::{Error, Result};

const TRAJECTORY_CHUNK: usize = 8;

#[derive(Clone, Copy)]
enum Stop {
    Observe(usize),
    Kick(usize),
}

fn kick_schedule(n_qubits: usize, rate: f64, total: f64, rng: &mut impl Rng) -> Vec<(f64, usize)> {
    let mut kicks = Vec::new();
    if rate <= 0.0 {
        return kicks;
    }
    let exp = Exp::new(rate).expect("positive rate");
    for q in 0..n_qubits {
        let mut t = exp.sample(rng);
        while t < total {
            kicks.push((t, q));
            t += exp.sample(rng);
        }
    }
    kicks
}

fn trajectory(
    register: &AtomRegister,
    pulses: &[Pulse],
    times: &[f64],
    rate: f64,
    config: &SimConfig,
    seed: u64,
    index: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = register.qubit_count();
    let total: f64 = pulses.iter().map(|p| p.duration_us).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut events: Vec<(f64, Stop)> = kick_schedule(n, rate, total, &mut rng)
        .into_iter()
        .map(|(t, q)| (t, Stop::Kick(q)))
        .chain(times.iter().enumerate().map(|(k, &t)| (t, Stop::Observe(k))))
        .collect();
    // Observations at a kick time see the state before the kick.
    events.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then_with(|| match (a.1, b.1) {
            (Stop::Observe(_), Stop::Kick(_)) => std::cmp::Ordering::Less,
            (Stop::Kick(_), Stop::Observe(_)) => std::cmp::Ordering::Greater,
            _ => std::cmp::Ordering::Equal,
        })
    });
    let stop_times: Vec<f64> = events.iter().map(|e| e.0).collect();
    let mut out = vec![Vec::new(); times.len()];
    run_with_stops(register, pulses, &stop_times, config, |k, state| {
        match events[k].1 {
            Stop::Observe(j) => out[j] = state.probabilities(),
            Stop::Kick(q) => {
                for (s, a) in state.amplitudes_mut().iter_mut().enumerate() {
                    if s >> q & 1 == 1 {
                        *a = -*a;
                    }
                }
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// Trajectory-averaged bitstring probabilities at each requested time,
/// before readout errors. Times are µs from the start of `pulses`.
pub fn noisy_probabilities(
    register: &AtomRegister,
    pulses: &[Pulse],
    times: &[f64],
    noise: &NoiseModel,
    config: &SimConfig,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    noise.validate()?;
    let sorted: Vec<f64> = {
        let mut t = times.to_vec();
        t.sort_by(f64::total_cmp);
        t
    };
    if sorted != times {
        return Err(Error::invalid("observation times must be ascending"));
    }
    let rate = angular(noise.dephasing_mhz) / 4.0;
    let runs = if rate > 0.0 { noise.trajectories } else { 1 };
    let dim = 1usize << register.qubit_count();
    let mut acc = vec![vec![0.0; dim]; times.len()];
    let indices: Vec<u64> = (0..runs as u64).collect();
    for chunk in indices.chunks(TRAJECTORY_CHUNK) {
        let results: Vec<Result<Vec<Vec<f64>>>> = chunk
            .par_iter()
            .map(|&r| trajectory(register, pulses, times, rate, config, seed, r))
            .collect();
        for res in results {
            for (a, p) in acc.iter_mut().zip(res?) {
                for (x, y) in a.iter_mut().zip(p) {
                    *x += y;
                }
            }
        }
    }
    for a in &mut acc {
        for x in a.iter_mut() {
            *x /= runs as f64;
        }
    }
    Ok(acc)
}

/// Excitation histogram after one pulse with dephasing and readout errors.
pub fn evolve_noisy(
    register: &AtomRegister,
    pulse: &Pulse,
    noise: &NoiseModel,
    config: &SimConfig,
    seed: u64,
) -> Result<ExcitationHistogram> {
    let probs = noisy_probabilities(
        register,
        std::slice::from_ref(pulse),
        &[pulse.duration_us],
        noise,
        config,
        seed,
    )?;
    let h = histogram_from_probabilities(&probs[0], register.qubit_count())?;
    apply_detection_errors_histogram(&h, noise.eps, noise.eps_prime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rydsim::{evolve, excitation_distribution};

    #[test]
    fn noiseless_limit_is_exact() {
        let reg = AtomRegister::new(vec![[0.0, 0.0], [5.3, 0.0], [2.65, 4.59]]).unwrap();
        let pulse = Pulse::new(1.0, 0.7, 0.9).unwrap();
        let cfg = SimConfig::default();
        let h = evolve_noisy(&reg, &pulse, &NoiseModel::noiseless(), &cfg, 0).unwrap();
        let exact = excitation_distribution(&evolve(&reg, &pulse, &cfg).unwrap());
        for (a, b) in h.probs.iter().zip(&exact.probs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn readout_errors_show_at_time_zero() {
        let positions = (0..6).map(|i| [5.3 * i as f64, 0.0]).collect();
        let reg = AtomRegister::new(positions).unwrap();
        let pulse = Pulse::new(1.0, 0.0, 0.0).unwrap();
        let noise = NoiseModel { trajectories: 4, ..NoiseModel::default() };
        let h = evolve_noisy(&reg, &pulse, &noise, &SimConfig::default(), 1).unwrap();
        assert!((h.mean() / 6.0 - 0.03).abs() < 1e-12);
    }

    #[test]
    fn deterministic_under_seed() {
        let reg = AtomRegister::new(vec![[0.0, 0.0], [6.0, 0.0]]).unwrap();
        let pulse = Pulse::new(1.0, 0.0, 2.0).unwrap();
        let noise = NoiseModel { dephasing_mhz: 0.5, trajectories: 20, ..NoiseModel::default() };
        let cfg = SimConfig::default();
        let a = evolve_noisy(&reg, &pulse, &noise, &cfg, 9).unwrap();
        let b = evolve_noisy(&reg, &pulse, &noise, &cfg, 9).unwrap();
        assert_eq!(a, b);
    }
}
