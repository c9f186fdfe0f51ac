//! C-SVM dual solved by sequential minimal optimization on a precomputed
//! kernel.
//!
//! Minimizes ½αᵀQα − eᵀα with Q_ij = y_i y_j K_ij over 0 ≤ α ≤ C, yᵀα = 0,
//! choosing working pairs by second-order gain.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::kernels::check_psd;
use crate::{Error, Result};

const TAU: f64 = 1e-12;
const PSD_TOL: f64 = 1e-8;
const JITTER: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoOptions {
    /// Stop once the maximal KKT violation drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SmoOptions {
    fn default() -> Self {
        SmoOptions {
            tolerance: 1e-3,
            max_iterations: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub alphas: Vec<f64>,
    pub labels: Vec<f64>,
    pub bias: f64,
    pub support_indices: Vec<usize>,
    pub c: f64,
    pub iterations: usize,
}

impl SvmModel {
    /// ½αᵀQα − eᵀα for the training kernel.
    pub fn dual_objective(&self, k: &DMatrix<f64>) -> f64 {
        dual_objective(k, &self.labels, &self.alphas)
    }

    /// Σ α_i y_i K(x, x_i) + b for each row of `k_cross`.
    pub fn decision_values(&self, k_cross: &DMatrix<f64>) -> Result<Vec<f64>> {
        if k_cross.ncols() != self.alphas.len() {
            return Err(Error::invalid(format!(
                "cross kernel has {} columns for {} training points",
                k_cross.ncols(),
                self.alphas.len()
            )));
        }
        Ok((0..k_cross.nrows())
            .map(|r| {
                self.support_indices
                    .iter()
                    .map(|&i| self.alphas[i] * self.labels[i] * k_cross[(r, i)])
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }
}

pub fn dual_objective(k: &DMatrix<f64>, labels: &[f64], alphas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alphas[i] * alphas[j] * labels[i] * labels[j] * k[(i, j)];
        }
    }
    0.5 * quad - alphas.iter().sum::<f64>()
}

fn check_inputs(k: &DMatrix<f64>, labels: &[f64], c: f64) -> Result<()> {
    if !k.is_square() || k.nrows() != labels.len() {
        return Err(Error::invalid("kernel must be square and match the labels"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid("C must be positive and finite"));
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::invalid("labels must be +1 or -1"));
    }
    if !labels.contains(&1.0) || !labels.contains(&-1.0) {
        return Err(Error::invalid("training data needs both classes"));
    }
    Ok(())
}

/// Trains with default SMO options after checking `k` is PSD; a slightly
/// indefinite kernel is used with 1e−8 added to its diagonal.
pub fn svm_train(k: &DMatrix<f64>, labels: &[f64], c: f64) -> Result<SvmModel> {
    svm_train_with(k, labels, c, &SmoOptions::default())
}

pub fn svm_train_with(k: &DMatrix<f64>, labels: &[f64], c: f64, opts: &SmoOptions) -> Result<SvmModel> {
    check_inputs(k, labels, c)?;
    let (psd, min_eig) = check_psd(k, PSD_TOL)?;
    if psd {
        smo(k, labels, c, opts)
    } else {
        log::warn!("kernel is not PSD (min eigenvalue {min_eig:e}); adding {JITTER:e} to the diagonal");
        let mut jittered = k.clone();
        for i in 0..k.nrows() {
            jittered[(i, i)] += JITTER;
        }
        smo(&jittered, labels, c, opts)
    }
}

/// SMO without the PSD check, for callers that validated the full kernel.
pub(crate) fn smo(k: &DMatrix<f64>, y: &[f64], c: f64, opts: &SmoOptions) -> Result<SvmModel> {
    smo_from(k, y, c, opts, None)
}

/// SMO started from `init`, a feasible point for this C (0 ≤ α ≤ C, yᵀα = 0).
/// Scaling the solution for a smaller C keeps it feasible, so a C grid can be
/// swept with warm starts.
pub(crate) fn smo_from(k: &DMatrix<f64>, y: &[f64], c: f64, opts: &SmoOptions, init: Option<&[f64]>) -> Result<SvmModel> {
    check_inputs(k, y, c)?;
    let n = y.len();
    let mut alpha = match init {
        Some(a) if a.len() == n => a.iter().map(|&v| v.clamp(0.0, c)).collect(),
        Some(_) => return Err(Error::invalid("warm start has the wrong length")),
        None => vec![0.0; n],
    };
    let mut grad = vec![-1.0; n];
    for j in 0..n {
        if alpha[j] != 0.0 {
            for t in 0..n {
                grad[t] += y[t] * y[j] * k[(t, j)] * alpha[j];
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| k[(i, i)]).collect();
    let mut iterations = 0;
    loop {
        // i: maximal violator in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let in_up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            if in_up && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        // j: best second-order gain in I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let in_low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
            if !in_low {
                continue;
            }
            let yg = y[t] * grad[t];
            gmax2 = gmax2.max(yg);
            let b = gmax + yg;
            if i != usize::MAX && b > 0.0 {
                let mut a = diag[i] + diag[t] - 2.0 * k[(i, t)];
                if a <= 0.0 {
                    a = TAU;
                }
                let gain = -b * b / a;
                if gain <= best {
                    best = gain;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < opts.tolerance || i == usize::MAX || j == usize::MAX {
            break;
        }
        if iterations >= opts.max_iterations {
            log::warn!("SMO reached {iterations} iterations without meeting the tolerance");
            break;
        }
        iterations += 1;

        let (ai, aj) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * k[(i, j)];
        if y[i] != y[j] {
            let mut quad = diag[i] + diag[j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[(t, i)] * di + y[j] * k[(t, j)] * dj);
        }
    }

    // Intercept from free vectors, else the midpoint of the feasible range.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    let rho = if free > 0 { sum / free as f64 } else { (ub + lb) / 2.0 };
    let support_indices = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(SvmModel {
        alphas: alpha,
        labels: y.to_vec(),
        bias: -rho,
        support_indices,
        c,
        iterations,
    })
}

/// Sign of the decision values, with ties going to +1.
pub fn svm_predict(model: &SvmModel, k_cross: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(model
        .decision_values(k_cross)?
        .into_iter()
        .map(|v| if v >= 0.0 { 1.0 } else { -1.0 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_closed_form() {
        let k = DMatrix::identity(2, 2);
        let m = svm_train(&k, &[1.0, -1.0], 100.0).unwrap();
        assert!((m.alphas[0] - 1.0).abs() < 1e-9 && (m.alphas[1] - 1.0).abs() < 1e-9);
        assert!(m.bias.abs() < 1e-9);
        assert_eq!(m.support_indices, vec![0, 1]);
        assert_eq!(svm_predict(&m, &k).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn constraints_hold_and_separable_data_is_fit() {
        let x = [-2.0, -1.5, -1.0, 1.0, 1.2, 2.5];
        let y = [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
        let k = DMatrix::from_fn(6, 6, |i, j| x[i] * x[j]);
        let m = svm_train(&k, &y, 10.0).unwrap();
        assert!(m.alphas.iter().all(|&a| (0.0..=10.0).contains(&a)));
        let eq: f64 = m.alphas.iter().zip(&y).map(|(a, l)| a * l).sum();
        assert!(eq.abs() < 1e-8);
        assert_eq!(svm_predict(&m, &k).unwrap(), y.to_vec());
    }

    #[test]
    fn zero_row_predicts_bias_sign() {
        let k = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.1, 0.2, 1.0, 0.3, 0.1, 0.3, 1.0]);
        let m = svm_train(&k, &[1.0, 1.0, -1.0], 1.0).unwrap();
        let zero = DMatrix::zeros(1, 3);
        let expected = if m.bias >= 0.0 { 1.0 } else { -1.0 };
        assert_eq!(svm_predict(&m, &zero).unwrap(), vec![expected]);
        assert!(svm_predict(&m, &DMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn single_class_is_rejected() {
        assert!(svm_train(&DMatrix::identity(2, 2), &[1.0, 1.0], 1.0).is_err());
    }
}
