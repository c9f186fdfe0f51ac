//! State-vector simulation of Rydberg atom registers.
//!
//! All frequencies are given as ν = ω/2π in MHz and times in µs. The
//! Hamiltonian in angular units is
//!
//! ```text
//! H = 2π [ Σ_i (Ω/2) σx_i − δ Σ_i n_i + Σ_{i<j} (C6/h) / r_ij⁶ n_i n_j ]
//! ```
//!
//! with the interaction summed over all pairs. Qubit `i` is bit `i` of a
//! basis index and a set bit means the atom is in the Rydberg state.

mod dense;
mod hamiltonian;
mod krylov;
mod meanfield;
mod measure;
mod noise;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::layout::Layout;
use crate::{Error, Result};

pub use dense::{dense_hamiltonian, evolve_dense};
pub use hamiltonian::Hamiltonian;
pub use krylov::{evolve, evolve_observed, evolve_sequence};
pub use meanfield::{mean_field_evolve, MeanFieldTrajectory};
pub use measure::{
    apply_detection_errors_counts, apply_detection_errors_histogram,
    detection_transition_probability, excitation_distribution, histogram_from_probabilities,
    jackknife_error, local_occupations, occupations_from_probabilities, sample_bitstrings,
    sample_from_probabilities, write_histograms_json, write_trajectory_csv, BitstringCounts,
    HistogramRecord,
};
pub use noise::{evolve_noisy, noisy_probabilities};

/// C6/h for the 60S Rydberg level of ⁸⁷Rb, in MHz·µm⁶.
pub const DEFAULT_C6_OVER_H: f64 = 138_000.0;
pub const DEFAULT_QUBIT_CEILING: usize = 20;
/// Registers above this size need [`SimConfig::override_hard_cap`].
pub const HARD_QUBIT_CAP: usize = 24;

/// Interaction frequency `C6/h ÷ r⁶` in MHz for a distance in µm.
pub fn interaction_strength(r_um: f64, c6_over_h: f64) -> Result<f64> {
    if !(r_um > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {r_um}")));
    }
    Ok(c6_over_h / r_um.powi(6))
}

/// Constant drive. `rabi_mhz` is Ω/2π and `detuning_mhz` is δ/2π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub rabi_mhz: f64,
    pub detuning_mhz: f64,
    pub duration_us: f64,
}

impl Pulse {
    pub fn new(rabi_mhz: f64, detuning_mhz: f64, duration_us: f64) -> Result<Self> {
        let p = Pulse {
            rabi_mhz,
            detuning_mhz,
            duration_us,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi_mhz.is_finite() && self.detuning_mhz.is_finite()) {
            return Err(Error::invalid("pulse parameters must be finite"));
        }
        if !(self.duration_us >= 0.0 && self.duration_us.is_finite()) {
            return Err(Error::invalid(format!(
                "pulse duration must be finite and nonnegative, got {}",
                self.duration_us
            )));
        }
        Ok(())
    }

    pub fn with_duration(self, duration_us: f64) -> Self {
        Pulse { duration_us, ..self }
    }
}

/// Atom positions in µm plus the van der Waals coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRegister {
    positions: Vec<[f64; 2]>,
    c6_over_h: f64,
}

impl AtomRegister {
    pub fn new(positions: Vec<[f64; 2]>) -> Result<Self> {
        Self::with_c6(positions, DEFAULT_C6_OVER_H)
    }

    pub fn with_c6(positions: Vec<[f64; 2]>, c6_over_h: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("a register needs at least one atom"));
        }
        if positions.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("atom positions must be finite"));
        }
        for a in 0..positions.len() {
            for b in a + 1..positions.len() {
                if positions[a] == positions[b] {
                    return Err(Error::Domain(format!("atoms {a} and {b} coincide")));
                }
            }
        }
        if !(c6_over_h >= 0.0) {
            return Err(Error::invalid("C6/h must be nonnegative"));
        }
        Ok(AtomRegister {
            positions,
            c6_over_h,
        })
    }

    pub fn from_layout(layout: &Layout) -> Result<Self> {
        Self::new(layout.positions.clone())
    }

    pub fn qubit_count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn c6_over_h(&self) -> f64 {
        self.c6_over_h
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.positions[a], self.positions[b]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    /// Pairwise interaction frequencies in MHz; zero on the diagonal.
    pub fn interaction_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.qubit_count();
        let mut u = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let v = self.c6_over_h / self.distance(a, b).powi(6);
                u[a][b] = v;
                u[b][a] = v;
            }
        }
        u
    }
}

/// Simulation limits and Krylov accuracy settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub qubit_ceiling: usize,
    pub override_hard_cap: bool,
    pub krylov_dim: usize,
    /// Bound on the accumulated Krylov truncation error over one evolution.
    pub tolerance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            qubit_ceiling: DEFAULT_QUBIT_CEILING,
            override_hard_cap: false,
            krylov_dim: 30,
            tolerance: 1e-10,
        }
    }
}

impl SimConfig {
    pub fn check(&self, qubits: usize) -> Result<()> {
        if qubits > HARD_QUBIT_CAP && !self.override_hard_cap {
            return Err(Error::Capability(format!(
                "{qubits} qubits exceed the hard cap of {HARD_QUBIT_CAP}; set override_hard_cap to proceed"
            )));
        }
        if qubits > self.qubit_ceiling {
            return Err(Error::Capability(format!(
                "{qubits} qubits exceed the simulation ceiling of {}",
                self.qubit_ceiling
            )));
        }
        Ok(())
    }
}

/// State vector over the 2^N computational basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// All atoms in the ground state.
    pub fn ground(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        QuantumState {
            n_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::invalid(format!(
                "{} amplitudes for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let state = QuantumState {
            n_qubits,
            amplitudes,
        };
        if (state.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state norm is {}", state.norm())));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Probability distribution over the total number of excitations 0..=N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationHistogram {
    pub probs: Vec<f64>,
    #[serde(default)]
    pub shots: Option<usize>,
}

impl ExcitationHistogram {
    pub fn new(probs: Vec<f64>, shots: Option<usize>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("histogram needs at least one bin"));
        }
        if probs.iter().any(|p| !(*p >= -1e-12)) {
            return Err(Error::invalid("histogram entries must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("histogram sums to {total}")));
        }
        Ok(ExcitationHistogram {
            probs: probs.into_iter().map(|p| p.max(0.0)).collect(),
            shots,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// Readout errors and effective dephasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Probability of reading a ground-state atom as excited.
    pub eps: f64,
    /// Probability of reading an excited atom as ground state.
    pub eps_prime: f64,
    /// Dephasing rate γ/2π in MHz, for the Lindblad operator √γ n̂ on every atom.
    pub dephasing_mhz: f64,
    pub trajectories: usize,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            eps: 0.03,
            eps_prime: 0.08,
            dephasing_mhz: 0.06,
            trajectories: 100,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel {
            eps: 0.0,
            eps_prime: 0.0,
            dephasing_mhz: 0.0,
            trajectories: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eps) || !(0.0..=1.0).contains(&self.eps_prime) {
            return Err(Error::invalid("detection error probabilities must lie in [0, 1]"));
        }
        if !(self.dephasing_mhz >= 0.0) {
            return Err(Error::invalid("dephasing rate must be nonnegative"));
        }
        if self.trajectories == 0 {
            return Err(Error::invalid("at least one trajectory is required"));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.eps == 0.0 && self.eps_prime == 0.0 && self.dephasing_mhz == 0.0
    }
}

pub(crate) fn angular(nu_mhz: f64) -> f64 {
    2.0 * PI * nu_mhz
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interaction_at_nearest_neighbor_distance() {
        let u = interaction_strength(5.3, DEFAULT_C6_OVER_H).unwrap();
        assert!((u - 138_000.0 / 5.3f64.powi(6)).abs() < 1e-12);
        assert!((u - 6.23).abs() < 0.01);
        let far = interaction_strength(10.6, DEFAULT_C6_OVER_H).unwrap();
        assert!((far - u / 64.0).abs() < 1e-12);
        assert!(interaction_strength(0.0, DEFAULT_C6_OVER_H).is_err());
    }

    #[test]
    fn ceiling_checks() {
        let cfg = SimConfig::default();
        assert!(cfg.check(20).is_ok());
        assert!(matches!(cfg.check(21), Err(Error::Capability(_))));
        let big = SimConfig { qubit_ceiling: 30, ..SimConfig::default() };
        assert!(big.check(25).is_err());
        let over = SimConfig { override_hard_cap: true, ..big };
        assert!(over.check(25).is_ok());
    }

    #[test]
    fn register_rejects_coincident_atoms() {
        assert!(AtomRegister::new(vec![[0.0, 0.0], [0.0, 0.0]]).is_err());
        assert!(AtomRegister::new(vec![]).is_err());
    }
}
