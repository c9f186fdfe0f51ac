use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svm::{smo_from, svm_predict, SmoOptions};
use crate::kernels::check_psd;
use crate::numeric::{logspace, mean, std_dev};
use crate::{Error, Result};

/// t_p / (t_p + (f_p + f_n)/2) with +1 as the positive class; 1 when there
/// is nothing to find and nothing was found.
pub fn f1_score(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.is_empty() || pred.len() != truth.len() {
        return Err(Error::invalid("predictions and labels must be non-empty and aligned"));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p > 0.0, t > 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    if tp + fp + fn_ == 0 {
        return Ok(1.0);
    }
    Ok(tp as f64 / (tp as f64 + (fp + fn_) as f64 / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub c_grid: Vec<f64>,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            repeats: 10,
            c_grid: logspace(1e-3, 1e3, 13),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub mean_f1: f64,
    pub std_f1: f64,
    /// F1 of every split at the selected C.
    pub split_scores: Vec<f64>,
    pub best_c: f64,
    /// (C, mean F1) over the whole grid.
    pub c_curve: Vec<(f64, f64)>,
    pub best_params: BTreeMap<String, f64>,
}

/// Splits indices into `folds` test folds with class proportions kept:
/// each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[f64], folds: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::invalid("need at least two folds"));
    }
    let mut out = vec![Vec::new(); folds];
    let mut offset = 0;
    for class in [1.0, -1.0] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::invalid(format!(
                "class {class:+} has {} members, fewer than {folds} folds",
                members.len()
            )));
        }
        members.shuffle(rng);
        for (r, idx) in members.into_iter().enumerate() {
            out[(r + offset) % folds].push(idx);
        }
        offset += 1;
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

fn submatrix(k: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| k[(rows[r], cols[c])])
}

/// Repeated stratified k-fold CV over the C grid; the report describes the
/// C with the best mean F1.
pub fn cross_validate(k: &DMatrix<f64>, labels: &[f64], config: &CvConfig) -> Result<ScoreReport> {
    if !k.is_square() || k.nrows() != labels.len() {
        return Err(Error::invalid("kernel must be square and match the labels"));
    }
    if config.c_grid.is_empty() || config.repeats == 0 {
        return Err(Error::invalid("C grid and repeat count must be non-empty"));
    }
    let (psd, min_eig) = check_psd(k, 1e-8)?;
    let k = if psd {
        k.clone()
    } else {
        log::warn!("kernel is not PSD (min eigenvalue {min_eig:e}); adding 1e-8 to the diagonal");
        k + DMatrix::identity(k.nrows(), k.nrows()) * 1e-8
    };
    let mut splits = Vec::new();
    for r in 0..config.repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(r as u64);
        let folds = stratified_folds(labels, config.folds, &mut rng)?;
        for test in folds {
            let train: Vec<usize> = (0..labels.len()).filter(|i| test.binary_search(i).is_err()).collect();
            splits.push((train, test));
        }
    }
    let opts = SmoOptions::default();
    // scores[split][c]
    let scores: Vec<Vec<f64>> = splits
        .par_iter()
        .map(|(train, test)| {
            let k_train = submatrix(&k, train, train);
            let k_test = submatrix(&k, test, train);
            let y_train: Vec<f64> = train.iter().map(|&i| labels[i]).collect();
            let y_test: Vec<f64> = test.iter().map(|&i| labels[i]).collect();
            let mut order: Vec<usize> = (0..config.c_grid.len()).collect();
            order.sort_by(|&a, &b| config.c_grid[a].total_cmp(&config.c_grid[b]));
            let mut row = vec![0.0; config.c_grid.len()];
            let mut prev: Option<(f64, Vec<f64>)> = None;
            for ci in order {
                let c = config.c_grid[ci];
                let init = prev.as_ref().map(|(pc, a)| a.iter().map(|v| v * c / pc).collect::<Vec<f64>>());
                let model = smo_from(&k_train, &y_train, c, &opts, init.as_deref())?;
                row[ci] = f1_score(&svm_predict(&model, &k_test)?, &y_test)?;
                prev = Some((c, model.alphas));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let c_curve: Vec<(f64, f64)> = config
        .c_grid
        .iter()
        .enumerate()
        .map(|(ci, &c)| (c, mean(&scores.iter().map(|s| s[ci]).collect::<Vec<_>>())))
        .collect();
    let best = (0..c_curve.len())
        .max_by(|&a, &b| c_curve[a].1.total_cmp(&c_curve[b].1).then(b.cmp(&a)))
        .unwrap();
    let split_scores: Vec<f64> = scores.iter().map(|s| s[best]).collect();
    Ok(ScoreReport {
        mean_f1: mean(&split_scores),
        std_f1: std_dev(&split_scores),
        split_scores,
        best_c: c_curve[best].0,
        c_curve,
        best_params: BTreeMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_values() {
        assert_eq!(f1_score(&[1.0, -1.0], &[1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(f1_score(&[-1.0, -1.0], &[1.0, -1.0]).unwrap(), 0.0);
        assert_eq!(f1_score(&[-1.0, -1.0], &[-1.0, -1.0]).unwrap(), 1.0);
        // tp 3, fp 1, fn 2
        let pred = [1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        let truth = [1.0, 1.0, 1.0, -1.0, 1.0, 1.0, -1.0];
        assert!((f1_score(&pred, &truth).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(f1_score(&[], &[]).is_err());
    }

    #[test]
    fn folds_partition_and_stratify() {
        let labels: Vec<f64> = (0..23).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let folds = stratified_folds(&labels, 5, &mut rng).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        for f in &folds {
            let pos = f.iter().filter(|&&i| labels[i] > 0.0).count();
            assert!((1..=2).contains(&pos));
        }
        assert!(stratified_folds(&labels[..6], 5, &mut rng).is_err());
    }

    #[test]
    fn duplicated_separable_data_scores_perfectly() {
        let x: Vec<f64> = (0..20).map(|i| if i < 10 { -1.0 } else { 1.0 }).collect();
        let k = DMatrix::from_fn(20, 20, |i, j| if x[i] == x[j] { 1.0 } else { 0.0 });
        let r = cross_validate(&k, &x, &CvConfig::default()).unwrap();
        assert_eq!(r.mean_f1, 1.0);
        assert_eq!(r.std_f1, 0.0);
        assert_eq!(r.split_scores.len(), 50);
    }
}
