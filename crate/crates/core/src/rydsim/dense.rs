//! Dense reference implementation for small registers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::hamiltonian::Hamiltonian;
use super::{AtomRegister, Pulse, QuantumState};
use crate::{Error, Result};

const DENSE_LIMIT: usize = 10;

/// Full 2^N × 2^N Hamiltonian matrix in rad/µs.
pub fn dense_hamiltonian(register: &AtomRegister, pulse: &Pulse) -> Result<DMatrix<Complex64>> {
    let n = register.qubit_count();
    if n > DENSE_LIMIT {
        return Err(Error::Capability(format!(
            "dense Hamiltonian limited to {DENSE_LIMIT} qubits"
        )));
    }
    let h = Hamiltonian::new(register, pulse);
    let dim = h.dim();
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for s in 0..dim {
        m[(s, s)] = Complex64::new(h.diagonal()[s], 0.0);
        for i in 0..n {
            m[(s ^ (1 << i), s)] = Complex64::new(h.half_rabi(), 0.0);
        }
    }
    Ok(m)
}

/// exp(−iHt)|0…0⟩ by dense matrix exponential.
pub fn evolve_dense(register: &AtomRegister, pulse: &Pulse) -> Result<QuantumState> {
    let h = dense_hamiltonian(register, pulse)?;
    let dim = h.nrows();
    let u = (h * Complex64::new(0.0, -pulse.duration_us)).exp();
    let mut psi0 = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    psi0[0] = Complex64::new(1.0, 0.0);
    let psi = u * psi0;
    let amps: Vec<Complex64> = psi.iter().copied().collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    QuantumState::from_amplitudes(
        register.qubit_count(),
        amps.into_iter().map(|a| a / norm).collect(),
    )
}
