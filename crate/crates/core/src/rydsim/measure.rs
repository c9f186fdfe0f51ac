//! Measurement statistics: excitation histograms, shot sampling, readout
//! errors and jackknife error bars.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ExcitationHistogram, Pulse, QuantumState};
use crate::numeric::binomial_pmf;
use crate::{Error, Result};

/// Histogram of Hamming weights of a probability vector over bitstrings.
pub fn histogram_from_probabilities(probs: &[f64], n_qubits: usize) -> Result<ExcitationHistogram> {
    let mut h = vec![0.0; n_qubits + 1];
    for (s, p) in probs.iter().enumerate() {
        h[s.count_ones() as usize] += p;
    }
    let total: f64 = h.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("probabilities sum to {total}")));
    }
    ExcitationHistogram::new(h.into_iter().map(|x| x / total).collect(), None)
}

/// Exact distribution of the total number of excitations.
pub fn excitation_distribution(state: &QuantumState) -> ExcitationHistogram {
    histogram_from_probabilities(&state.probabilities(), state.n_qubits())
        .expect("normalized state")
}

/// ⟨n_i⟩ for every qubit from bitstring probabilities.
pub fn occupations_from_probabilities(probs: &[f64], n_qubits: usize) -> Vec<f64> {
    let mut occ = vec![0.0; n_qubits];
    for (s, p) in probs.iter().enumerate() {
        let mut bits = s;
        while bits != 0 {
            occ[bits.trailing_zeros() as usize] += p;
            bits &= bits - 1;
        }
    }
    occ
}

pub fn local_occupations(state: &QuantumState) -> Vec<f64> {
    occupations_from_probabilities(&state.probabilities(), state.n_qubits())
}

/// Shot record: bitstring (bit `i` = qubit `i`) → count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitstringCounts {
    pub n_qubits: usize,
    pub counts: BTreeMap<u64, usize>,
}

impl BitstringCounts {
    pub fn from_samples(n_qubits: usize, samples: &[u64]) -> Self {
        let mut counts = BTreeMap::new();
        for &s in samples {
            *counts.entry(s).or_insert(0) += 1;
        }
        BitstringCounts { n_qubits, counts }
    }

    pub fn shots(&self) -> usize {
        self.counts.values().sum()
    }

    /// Individual shots in ascending bitstring order.
    pub fn samples(&self) -> Vec<u64> {
        self.counts
            .iter()
            .flat_map(|(&s, &c)| std::iter::repeat_n(s, c))
            .collect()
    }

    pub fn to_histogram(&self) -> Result<ExcitationHistogram> {
        let shots = self.shots();
        if shots == 0 {
            return Err(Error::invalid("no shots recorded"));
        }
        let mut h = vec![0.0; self.n_qubits + 1];
        for (&s, &c) in &self.counts {
            h[s.count_ones() as usize] += c as f64 / shots as f64;
        }
        ExcitationHistogram::new(h, Some(shots))
    }

    pub fn mean_occupations(&self) -> Vec<f64> {
        let shots = self.shots().max(1) as f64;
        let mut occ = vec![0.0; self.n_qubits];
        for (&s, &c) in &self.counts {
            for (i, o) in occ.iter_mut().enumerate() {
                if s >> i & 1 == 1 {
                    *o += c as f64 / shots;
                }
            }
        }
        occ
    }
}

/// I.i.d. bitstring samples from a probability vector.
pub fn sample_from_probabilities(
    probs: &[f64],
    n_qubits: usize,
    shots: usize,
    seed: u64,
) -> Result<BitstringCounts> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    let dist = WeightedIndex::new(probs.iter().map(|p| p.max(0.0)))
        .map_err(|e| Error::invalid(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<u64> = (0..shots).map(|_| dist.sample(&mut rng) as u64).collect();
    Ok(BitstringCounts::from_samples(n_qubits, &samples))
}

pub fn sample_bitstrings(state: &QuantumState, shots: usize, seed: u64) -> Result<BitstringCounts> {
    sample_from_probabilities(&state.probabilities(), state.n_qubits(), shots, seed)
}

fn check_eps(eps: f64, eps_prime: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) || !(0.0..=1.0).contains(&eps_prime) {
        return Err(Error::invalid("detection error probabilities must lie in [0, 1]"));
    }
    Ok(())
}

/// Flips every bit of every shot independently: 0→1 with `eps`, 1→0 with
/// `eps_prime`.
pub fn apply_detection_errors_counts(
    counts: &BitstringCounts,
    eps: f64,
    eps_prime: f64,
    seed: u64,
) -> Result<BitstringCounts> {
    check_eps(eps, eps_prime)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy: Vec<u64> = counts
        .samples()
        .into_iter()
        .map(|s| {
            let mut out = s;
            for i in 0..counts.n_qubits {
                let flip = if s >> i & 1 == 1 {
                    rng.random::<f64>() < eps_prime
                } else {
                    rng.random::<f64>() < eps
                };
                if flip {
                    out ^= 1 << i;
                }
            }
            out
        })
        .collect();
    Ok(BitstringCounts::from_samples(counts.n_qubits, &noisy))
}

/// Readout errors on an excitation-count distribution: each of the k excited
/// atoms survives with probability 1 − ε′ and each of the N − k ground atoms
/// fires falsely with probability ε.
pub fn apply_detection_errors_histogram(
    hist: &ExcitationHistogram,
    eps: f64,
    eps_prime: f64,
) -> Result<ExcitationHistogram> {
    check_eps(eps, eps_prime)?;
    let n = hist.n_qubits();
    let mut out = vec![0.0; n + 1];
    for (k, &pk) in hist.probs.iter().enumerate() {
        if pk == 0.0 {
            continue;
        }
        let survive = binomial_pmf(k, 1.0 - eps_prime);
        let fire = binomial_pmf(n - k, eps);
        for (s, ps) in survive.iter().enumerate() {
            for (f, pf) in fire.iter().enumerate() {
                out[s + f] += pk * ps * pf;
            }
        }
    }
    ExcitationHistogram::new(out, hist.shots)
}

/// P(measure `measured` | prepared `prepared`) under independent readout
/// errors on `n_qubits` atoms.
pub fn detection_transition_probability(
    measured: u64,
    prepared: u64,
    n_qubits: usize,
    eps: f64,
    eps_prime: f64,
) -> Result<f64> {
    check_eps(eps, eps_prime)?;
    let mut p = 1.0;
    for i in 0..n_qubits {
        let (m, q) = (measured >> i & 1, prepared >> i & 1);
        p *= match (q, m) {
            (0, 0) => 1.0 - eps,
            (0, _) => eps,
            (_, 1) => 1.0 - eps_prime,
            _ => eps_prime,
        };
    }
    Ok(p)
}

/// Leave-one-out jackknife standard error of `statistic`.
pub fn jackknife_error<T: Clone, F>(samples: &[T], statistic: F) -> Result<f64>
where
    F: Fn(&[T]) -> f64,
{
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid("jackknife needs at least two samples"));
    }
    let mut buf: Vec<T> = samples[1..].to_vec();
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        // `buf` holds every sample except `samples[i]`.
        values.push(statistic(&buf));
        if i + 1 < n {
            buf[i] = samples[i].clone();
        }
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64;
    Ok(var.sqrt())
}

/// One exported histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub graph_id: usize,
    pub pulse: Vec<Pulse>,
    pub shots: Option<usize>,
    pub probs: Vec<f64>,
}

pub fn write_histograms_json(path: &Path, records: &[HistogramRecord]) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(records)?)?;
    Ok(())
}

/// CSV with a `t` column followed by one column per named series.
pub fn write_trajectory_csv(path: &Path, times: &[f64], series: &[(String, Vec<f64>)]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    let header: Vec<&str> = std::iter::once("t")
        .chain(series.iter().map(|(name, _)| name.as_str()))
        .collect();
    writeln!(f, "{}", header.join(","))?;
    for (k, t) in times.iter().enumerate() {
        let row: Vec<String> = std::iter::once(t.to_string())
            .chain(series.iter().map(|(_, v)| v[k].to_string()))
            .collect();
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn state(n: usize, amps: &[(usize, f64)]) -> QuantumState {
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
        for &(s, a) in amps {
            v[s] = Complex64::new(a, 0.0);
        }
        QuantumState::from_amplitudes(n, v).unwrap()
    }

    #[test]
    fn basic_distributions() {
        assert_eq!(excitation_distribution(&QuantumState::ground(3)).probs, vec![1.0, 0.0, 0.0, 0.0]);
        let uniform = state(2, &[(0, 0.5), (1, 0.5), (2, 0.5), (3, 0.5)]);
        assert_eq!(excitation_distribution(&uniform).probs, vec![0.25, 0.5, 0.25]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ghz = state(2, &[(0, h), (3, h)]);
        let p = excitation_distribution(&ghz).probs;
        assert!((p[0] - 0.5).abs() < 1e-15 && p[1] == 0.0 && (p[2] - 0.5).abs() < 1e-15);
        assert_eq!(local_occupations(&state(2, &[(0b01, 1.0)])), vec![1.0, 0.0]);
    }

    #[test]
    fn transition_probability_product_formula() {
        let p = detection_transition_probability(0b1001, 0b0101, 4, 0.03, 0.08).unwrap();
        assert!((p - 0.03 * 0.08 * 0.97 * 0.92).abs() < 1e-15);
    }

    #[test]
    fn histogram_errors_from_ground_state_are_binomial() {
        let h = ExcitationHistogram::new(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], None).unwrap();
        let out = apply_detection_errors_histogram(&h, 0.03, 0.08).unwrap();
        for (a, b) in out.probs.iter().zip(binomial_pmf(6, 0.03)) {
            assert!((a - b).abs() < 1e-15);
        }
        let same = apply_detection_errors_histogram(&h, 0.0, 0.0).unwrap();
        assert_eq!(same, h);
    }

    #[test]
    fn delta_state_samples_are_identical() {
        let s = state(3, &[(0b101, 1.0)]);
        let c = sample_bitstrings(&s, 50, 1).unwrap();
        assert_eq!(c.counts.len(), 1);
        assert_eq!(c.counts[&0b101], 50);
    }

    #[test]
    fn jackknife_of_constant_is_zero() {
        let xs = vec![2.0; 10];
        let e = jackknife_error(&xs, |s| s.iter().sum::<f64>() / s.len() as f64).unwrap();
        assert!(e.abs() < 1e-15);
        assert!(jackknife_error(&[1.0], |s| s[0]).is_err());
    }
}
