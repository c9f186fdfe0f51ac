//! Brute-force C-SVM dual solver for tiny problems.

use nalgebra::{DMatrix, DVector};

pub struct QpSolution {
    pub alphas: Vec<f64>,
    pub objective: f64,
    pub bias: f64,
}

/// Enumerates every split of the points into α = 0, α = C and free, solves
/// the equality-constrained problem on the free set, and keeps the best
/// feasible point. Exact for positive definite kernels.
pub fn brute_force_svm(k: &DMatrix<f64>, y: &[f64], c: f64) -> QpSolution {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let objective = |a: &[f64]| {
        let v = DVector::from_column_slice(a);
        0.5 * (v.transpose() * &q * &v)[(0, 0)] - v.sum()
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for code in 0..3usize.pow(n as u32) {
        let mut state = vec![0u8; n];
        let mut x = code;
        for s in state.iter_mut() {
            *s = (x % 3) as u8;
            x /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if !free.is_empty() {
            let f = free.len();
            let mut m = DMatrix::zeros(f + 1, f + 1);
            let mut rhs = DVector::zeros(f + 1);
            for (a, &i) in free.iter().enumerate() {
                for (b, &j) in free.iter().enumerate() {
                    m[(a, b)] = q[(i, j)];
                }
                m[(a, f)] = y[i];
                m[(f, a)] = y[i];
                rhs[a] = 1.0 - (0..n).filter(|j| state[*j] == 1).map(|j| q[(i, j)] * c).sum::<f64>();
            }
            rhs[f] = -(0..n).filter(|j| state[*j] == 1).map(|j| y[j] * c).sum::<f64>();
            let Some(sol) = m.lu().solve(&rhs) else { continue };
            for (a, &i) in free.iter().enumerate() {
                alpha[i] = sol[a];
            }
        }
        let feasible = alpha.iter().all(|&a| (-1e-12..=c + 1e-12).contains(&a))
            && alpha.iter().zip(y).map(|(a, y)| a * y).sum::<f64>().abs() < 1e-9;
        if !feasible {
            continue;
        }
        let obj = objective(&alpha);
        if best.as_ref().is_none_or(|(_, b)| obj < *b) {
            best = Some((alpha, obj));
        }
    }
    let (alphas, objective) = best.expect("the zero vector is always feasible");
    let bias = bias_of(k, y, &alphas, c);
    QpSolution { alphas, objective, bias }
}

/// Mean over free support vectors, midpoint of the feasible interval otherwise.
fn bias_of(k: &DMatrix<f64>, y: &[f64], alphas: &[f64], c: f64) -> f64 {
    let n = y.len();
    let f: Vec<f64> = (0..n).map(|i| (0..n).map(|j| alphas[j] * y[j] * k[(i, j)]).sum()).collect();
    let eps = 1e-8 * c.max(1.0);
    let free: Vec<usize> = (0..n).filter(|&i| alphas[i] > eps && alphas[i] < c - eps).collect();
    if !free.is_empty() {
        return free.iter().map(|&i| y[i] - f[i]).sum::<f64>() / free.len() as f64;
    }
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let r = y[i] - f[i];
        let at_upper = alphas[i] >= c - eps;
        // y_i f(x_i) ≥ 1 at α = 0, ≤ 1 at α = C.
        if (y[i] > 0.0) != at_upper {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        _ => 0.0,
    }
}
