//! Product-state (mean-field) dynamics.
//!
//! Every atom keeps its own two-level state (a_i, b_i) and feels the others
//! only through the effective detuning δ − Σ_j U_ij ⟨n_j⟩:
//!
//! ```text
//! i ȧ_i = (Ω/2) b_i
//! i ḃ_i = (Ω/2) a_i − (δ − Σ_j U_ij |b_j|²) b_i
//! ```

use serde::{Deserialize, Serialize};

use super::{angular, AtomRegister, Pulse};
use crate::graphs::Graph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldTrajectory {
    pub times: Vec<f64>,
    /// `occupations[k][i]` is ⟨n_i⟩ at `times[k]`.
    pub occupations: Vec<Vec<f64>>,
}

struct Rhs {
    half_rabi: f64,
    delta: f64,
    coupling: Vec<Vec<(usize, f64)>>,
}

impl Rhs {
    // State layout: [Re a, Im a, Re b, Im b] per atom.
    fn eval(&self, y: &[f64], dy: &mut [f64]) {
        let n = self.coupling.len();
        for i in 0..n {
            let (ar, ai, br, bi) = (y[4 * i], y[4 * i + 1], y[4 * i + 2], y[4 * i + 3]);
            let shift: f64 = self.coupling[i]
                .iter()
                .map(|&(j, u)| u * (y[4 * j + 2].powi(2) + y[4 * j + 3].powi(2)))
                .sum();
            let e = shift - self.delta;
            // d/dt (x) = −i · (H x)
            let ha_r = self.half_rabi * br;
            let ha_i = self.half_rabi * bi;
            let hb_r = self.half_rabi * ar + e * br;
            let hb_i = self.half_rabi * ai + e * bi;
            dy[4 * i] = ha_i;
            dy[4 * i + 1] = -ha_r;
            dy[4 * i + 2] = hb_i;
            dy[4 * i + 3] = -hb_r;
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-12;
const MAX_STEPS: usize = 10_000_000;

fn integrate(rhs: &Rhs, y: &mut [f64], t0: f64, t1: f64, h: &mut f64, steps: &mut usize) -> Result<()> {
    let n = y.len();
    let mut t = t0;
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    while t < t1 {
        let step = h.min(t1 - t);
        rhs.eval(y, &mut k[0]);
        for s in 1..7 {
            for idx in 0..n {
                tmp[idx] = y[idx] + step * (0..s).map(|r| A[s][r] * k[r][idx]).sum::<f64>();
            }
            rhs.eval(&tmp, &mut k[s]);
        }
        let mut err: f64 = 0.0;
        let mut y5 = vec![0.0; n];
        for idx in 0..n {
            let d5: f64 = (0..7).map(|s| B5[s] * k[s][idx]).sum();
            let d4: f64 = (0..7).map(|s| B4[s] * k[s][idx]).sum();
            y5[idx] = y[idx] + step * d5;
            let scale = ATOL + RTOL * y[idx].abs().max(y5[idx].abs());
            err = err.max((step * (d5 - d4)).abs() / scale);
        }
        if err <= 1.0 {
            t += step;
            y.copy_from_slice(&y5);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        *h = step * factor;
        *steps += 1;
        if *steps > MAX_STEPS || *h < 1e-15 {
            return Err(Error::Numeric(format!(
                "mean-field integration stalled at t = {t} µs after {steps} steps (step {h:e})"
            )));
        }
    }
    Ok(())
}

/// Integrates the product-state equations from the all-ground state and
/// records ⟨n_i⟩ at each requested time (ascending, µs). With
/// `nn_graph = Some(g)` only pairs joined by an edge of `g` interact;
/// otherwise every pair does.
pub fn mean_field_evolve(
    register: &AtomRegister,
    pulse: &Pulse,
    times: &[f64],
    nn_graph: Option<&Graph>,
) -> Result<MeanFieldTrajectory> {
    pulse.validate()?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::invalid("times must be nonnegative and ascending"));
    }
    let n = register.qubit_count();
    if let Some(g) = nn_graph {
        if g.node_count() != n {
            return Err(Error::invalid("graph and register sizes differ"));
        }
    }
    let u = register.interaction_matrix();
    let coupling = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && nn_graph.is_none_or(|g| g.has_edge(i, j)))
                .map(|j| (j, angular(u[i][j])))
                .collect()
        })
        .collect();
    let rhs = Rhs {
        half_rabi: angular(pulse.rabi_mhz) / 2.0,
        delta: angular(pulse.detuning_mhz),
        coupling,
    };
    let mut y = vec![0.0; 4 * n];
    for i in 0..n {
        y[4 * i] = 1.0;
    }
    let mut h = 1e-3;
    let mut steps = 0;
    let mut t = 0.0;
    let mut occupations = Vec::with_capacity(times.len());
    for &target in times {
        integrate(&rhs, &mut y, t, target, &mut h, &mut steps)?;
        t = target;
        occupations.push((0..n).map(|i| y[4 * i + 2].powi(2) + y[4 * i + 3].powi(2)).collect());
    }
    Ok(MeanFieldTrajectory {
        times: times.to_vec(),
        occupations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_atom_follows_rabi_formula() {
        let reg = AtomRegister::new(vec![[0.0, 0.0]]).unwrap();
        let (omega, delta) = (1.0, 0.7);
        let pulse = Pulse::new(omega, delta, 2.0).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
        let tr = mean_field_evolve(&reg, &pulse, &times, None).unwrap();
        let w: f64 = omega * omega + delta * delta;
        for (t, occ) in times.iter().zip(&tr.occupations) {
            let exact = omega * omega / w * (std::f64::consts::PI * w.sqrt() * t).sin().powi(2);
            assert!((occ[0] - exact).abs() < 1e-6, "t = {t}");
        }
    }
}
