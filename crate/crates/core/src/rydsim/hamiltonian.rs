use num_complex::Complex64;
use rayon::prelude::*;

use super::{angular, AtomRegister, Pulse};

const PARALLEL_DIM: usize = 1 << 14;

/// Matrix-free Rydberg Hamiltonian in rad/µs. The diagonal holds the
/// detuning and interaction energies; the off-diagonal part is the uniform
/// σx drive.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n_qubits: usize,
    diagonal: Vec<f64>,
    half_rabi: f64,
}

/// Σ_{i<j} U_ij n_i n_j for every basis state, in MHz.
pub(crate) fn interaction_diagonal(register: &AtomRegister) -> Vec<f64> {
    let n = register.qubit_count();
    let u = register.interaction_matrix();
    let mut diag = vec![0.0; 1 << n];
    // Build by adding the highest set bit to an already computed state.
    for s in 1usize..(1 << n) {
        let top = usize::BITS as usize - 1 - s.leading_zeros() as usize;
        let rest = s & !(1 << top);
        let mut e = diag[rest];
        let mut bits = rest;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            e += u[top][j];
            bits &= bits - 1;
        }
        diag[s] = e;
    }
    diag
}

impl Hamiltonian {
    pub fn new(register: &AtomRegister, pulse: &Pulse) -> Self {
        Self::from_interactions(register.qubit_count(), &interaction_diagonal(register), pulse)
    }

    pub(crate) fn from_interactions(n_qubits: usize, interactions: &[f64], pulse: &Pulse) -> Self {
        let delta = pulse.detuning_mhz;
        let diagonal = interactions
            .iter()
            .enumerate()
            .map(|(s, u)| angular(u - delta * s.count_ones() as f64))
            .collect();
        Hamiltonian {
            n_qubits,
            diagonal,
            half_rabi: angular(pulse.rabi_mhz) / 2.0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn half_rabi(&self) -> f64 {
        self.half_rabi
    }

    fn row(&self, s: usize, x: &[Complex64]) -> Complex64 {
        let mut acc = x[s] * self.diagonal[s];
        if self.half_rabi != 0.0 {
            let mut off = Complex64::new(0.0, 0.0);
            for i in 0..self.n_qubits {
                off += x[s ^ (1 << i)];
            }
            acc += off * self.half_rabi;
        }
        acc
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        if self.dim() >= PARALLEL_DIM {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(s, out)| *out = self.row(s, x));
        } else {
            for (s, out) in y.iter_mut().enumerate() {
                *out = self.row(s, x);
            }
        }
    }

    /// ⟨x|H|x⟩ for a normalized state.
    pub fn expectation(&self, x: &[Complex64]) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let d = self.diagonal.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        d + self.half_rabi.abs() * self.n_qubits as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matches_pair_sum() {
        let reg = AtomRegister::new(vec![[0.0, 0.0], [5.0, 0.0], [0.0, 7.0]]).unwrap();
        let u = reg.interaction_matrix();
        let d = interaction_diagonal(&reg);
        assert_eq!(d[0], 0.0);
        assert_eq!(d[0b001], 0.0);
        assert!((d[0b011] - u[0][1]).abs() < 1e-12);
        assert!((d[0b111] - (u[0][1] + u[0][2] + u[1][2])).abs() < 1e-12);
    }
}
