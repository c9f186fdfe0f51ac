//! Time evolution by Lanczos exponentiation with adaptive sub-steps.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::hamiltonian::{interaction_diagonal, Hamiltonian};
use super::{AtomRegister, Pulse, QuantumState, SimConfig};
use crate::{Error, Result};

const KRYLOV_MEMORY_BYTES: usize = 1 << 30;
const BISECTION_STEPS: usize = 6;
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

struct Workspace {
    basis: Vec<Vec<Complex64>>,
    w: Vec<Complex64>,
}

impl Workspace {
    fn new(dim: usize, m: usize) -> Self {
        Workspace {
            basis: (0..m).map(|_| vec![ZERO; dim]).collect(),
            w: vec![ZERO; dim],
        }
    }
}

/// Applies exp(−iHt) to `psi` in place. Each sub-step builds a Lanczos basis
/// with the three-term recurrence and picks the longest step whose a
/// posteriori error estimate β_m |[e^{−iτT} e₁]_m| stays within the step's
/// share of `tol`.
fn propagate(h: &Hamiltonian, psi: &mut [Complex64], t: f64, tol: f64, ws: &mut Workspace) -> Result<()> {
    if t <= 0.0 {
        return Ok(());
    }
    let m_max = ws.basis.len();
    let mut remaining = t;
    while remaining > 0.0 {
        let beta0 = norm(psi);
        if beta0 == 0.0 {
            return Ok(());
        }
        for (b, p) in ws.basis[0].iter_mut().zip(psi.iter()) {
            *b = p / beta0;
        }
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut residual = 0.0;
        let scale = h.norm_bound().max(1.0);
        for j in 0..m_max {
            h.apply(&ws.basis[j], &mut ws.w);
            let a = dot(&ws.basis[j], &ws.w).re;
            alpha.push(a);
            for (wk, vk) in ws.w.iter_mut().zip(&ws.basis[j]) {
                *wk -= vk * a;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (wk, vk) in ws.w.iter_mut().zip(&ws.basis[j - 1]) {
                    *wk -= vk * b;
                }
            }
            for k in j.saturating_sub(1)..=j {
                let c = dot(&ws.basis[k], &ws.w);
                for (wk, vk) in ws.w.iter_mut().zip(&ws.basis[k]) {
                    *wk -= vk * c;
                }
            }
            let b = norm(&ws.w);
            if j + 1 == m_max {
                residual = b;
                break;
            }
            if b <= 1e-13 * scale {
                // Invariant subspace: the projection is exact.
                break;
            }
            beta.push(b);
            for (dst, src) in ws.basis[j + 1].iter_mut().zip(&ws.w) {
                *dst = src / b;
            }
        }
        let m = alpha.len();
        let t_mat = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t_mat);
        let coeffs = |tau: f64| -> Vec<Complex64> {
            let phases: Vec<Complex64> = (0..m)
                .map(|k| Complex64::from_polar(eig.eigenvectors[(0, k)], -tau * eig.eigenvalues[k]))
                .collect();
            (0..m)
                .map(|r| (0..m).map(|k| phases[k] * eig.eigenvectors[(r, k)]).sum())
                .collect()
        };
        let accepts = |tau: f64| residual == 0.0 || residual * coeffs(tau)[m - 1].norm() <= tol * tau / t;
        let mut tau = remaining;
        if !accepts(tau) {
            let mut hi = tau;
            loop {
                tau *= 0.5;
                if tau < t * 1e-12 {
                    return Err(Error::Numeric(format!("Krylov step collapsed below {tau:e} µs")));
                }
                if accepts(tau) {
                    break;
                }
                hi = tau;
            }
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (tau + hi);
                if accepts(mid) {
                    tau = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let c = coeffs(tau);
        for p in psi.iter_mut() {
            *p = ZERO;
        }
        for (k, ck) in c.iter().enumerate() {
            let f = ck * beta0;
            for (p, v) in psi.iter_mut().zip(&ws.basis[k]) {
                *p += v * f;
            }
        }
        remaining -= tau;
        if remaining < t * 1e-14 {
            break;
        }
    }
    Ok(())
}

/// Evolves through a pulse sequence, stopping at each time in `stops`
/// (µs from the start, ascending) to hand the state to `at_stop`, which may
/// modify it.
pub(crate) fn run_with_stops<F>(
    register: &AtomRegister,
    pulses: &[Pulse],
    stops: &[f64],
    config: &SimConfig,
    mut at_stop: F,
) -> Result<QuantumState>
where
    F: FnMut(usize, &mut QuantumState) -> Result<()>,
{
    let n = register.qubit_count();
    config.check(n)?;
    for p in pulses {
        p.validate()?;
    }
    let total: f64 = pulses.iter().map(|p| p.duration_us).sum();
    if stops.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("observation times must be ascending"));
    }
    if let Some(&last) = stops.last() {
        if last > total * (1.0 + 1e-12) + 1e-12 || stops[0] < 0.0 {
            return Err(Error::invalid(format!(
                "observation time {last} outside the sequence duration {total}"
            )));
        }
    }
    let dim = 1usize << n;
    let m = config
        .krylov_dim
        .min(dim)
        .min(KRYLOV_MEMORY_BYTES / (dim * 16))
        .max(2.min(dim));
    let mut ws = Workspace::new(dim, m);
    let interactions = interaction_diagonal(register);
    let mut state = QuantumState::ground(n);
    let mut stop_iter = stops.iter().copied().enumerate().peekable();
    let mut clock = 0.0;
    for (pi, pulse) in pulses.iter().enumerate() {
        let h = Hamiltonian::from_interactions(n, &interactions, pulse);
        let end = clock + pulse.duration_us;
        let is_last = pi + 1 == pulses.len();
        loop {
            let next = match stop_iter.peek() {
                Some(&(_, s)) if s < end || (is_last && s <= end + 1e-12) => Some(s),
                _ => None,
            };
            match next {
                Some(s) => {
                    let dt = (s - clock).max(0.0);
                    propagate(&h, state.amplitudes_mut(), dt, config.tolerance, &mut ws)?;
                    clock = s.max(clock);
                    let (k, _) = stop_iter.next().unwrap();
                    at_stop(k, &mut state)?;
                }
                None => {
                    propagate(&h, state.amplitudes_mut(), end - clock, config.tolerance, &mut ws)?;
                    clock = end;
                    break;
                }
            }
        }
    }
    for (k, _) in stop_iter {
        at_stop(k, &mut state)?;
    }
    Ok(state)
}

/// exp(−iHt)|0…0⟩ for one constant pulse.
pub fn evolve(register: &AtomRegister, pulse: &Pulse, config: &SimConfig) -> Result<QuantumState> {
    run_with_stops(register, std::slice::from_ref(pulse), &[], config, |_, _| Ok(()))
}

/// Evolution through consecutive constant pulses.
pub fn evolve_sequence(register: &AtomRegister, pulses: &[Pulse], config: &SimConfig) -> Result<QuantumState> {
    run_with_stops(register, pulses, &[], config, |_, _| Ok(()))
}

/// Evolution through `pulses`, calling `observe(k, times[k], state)` at each
/// requested time. Returns the final state.
pub fn evolve_observed<F>(
    register: &AtomRegister,
    pulses: &[Pulse],
    times: &[f64],
    config: &SimConfig,
    mut observe: F,
) -> Result<QuantumState>
where
    F: FnMut(usize, f64, &QuantumState),
{
    run_with_stops(register, pulses, times, config, |k, s| {
        observe(k, times[k], s);
        Ok(())
    })
}
