use std::path::Path;

use super::{symmetric_from_fn, KernelKind, KernelMatrix};
use crate::numeric::{binomial_pmf, convolve};
use crate::rydsim::{ExcitationHistogram, HistogramRecord};
use crate::{Error, Result};

const NORM_TOL: f64 = 1e-6;

fn check_normalized(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !(*x >= -1e-12)) {
        return Err(Error::invalid("distribution has negative entries"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::invalid(format!("distribution sums to {total}")));
    }
    Ok(())
}

fn entropy_unchecked(p: impl Iterator<Item = f64>) -> f64 {
    -p.filter(|&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// −Σ p ln p.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    check_normalized(p)?;
    Ok(entropy_unchecked(p.iter().copied()).max(0.0))
}

/// Jensen-Shannon divergence in nats; the shorter input is zero-padded.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    check_normalized(p)?;
    check_normalized(q)?;
    Ok(js_unchecked(p, q))
}

fn js_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let mix = (0..len).map(|i| 0.5 * (at(p, i) + at(q, i)));
    let js = entropy_unchecked(mix)
        - 0.5 * (entropy_unchecked(p.iter().copied()) + entropy_unchecked(q.iter().copied()));
    js.clamp(0.0, std::f64::consts::LN_2)
}

/// Per-graph excitation histograms; graph `i` has `histograms[i].n_qubits()` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSet {
    pub graph_ids: Vec<usize>,
    pub histograms: Vec<ExcitationHistogram>,
}

impl DistributionSet {
    pub fn new(graph_ids: Vec<usize>, histograms: Vec<ExcitationHistogram>) -> Result<Self> {
        if graph_ids.len() != histograms.len() {
            return Err(Error::invalid("one histogram per graph id required"));
        }
        for h in &histograms {
            check_normalized(&h.probs)?;
        }
        Ok(DistributionSet {
            graph_ids,
            histograms,
        })
    }

    /// Checks every histogram has `sizes[i] + 1` bins.
    pub fn check_sizes(&self, sizes: &[usize]) -> Result<()> {
        if sizes.len() != self.len() {
            return Err(Error::invalid("size list does not match the distribution set"));
        }
        for (k, (h, &n)) in self.histograms.iter().zip(sizes).enumerate() {
            if h.n_qubits() != n {
                return Err(Error::invalid(format!(
                    "histogram {k} has {} bins for a {n}-node graph",
                    h.probs.len()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.histograms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histograms.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.histograms.iter().map(|h| h.n_qubits()).collect()
    }

    pub fn from_records(records: &[HistogramRecord]) -> Result<Self> {
        let histograms = records
            .iter()
            .map(|r| ExcitationHistogram::new(r.probs.clone(), r.shots))
            .collect::<Result<Vec<_>>>()?;
        Self::new(records.iter().map(|r| r.graph_id).collect(), histograms)
    }

    /// Reads histograms written by `write_histograms_json`, e.g. hardware data.
    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let records: Vec<HistogramRecord> = serde_json::from_str(&text)?;
        Self::from_records(&records)
    }
}

/// K_ij = exp(−JS(P_i, P_j)).
pub fn qek_matrix(ds: &DistributionSet) -> Result<KernelMatrix> {
    let h = &ds.histograms;
    let k = symmetric_from_fn(ds.len(), |i, j| {
        if i == j {
            1.0
        } else {
            (-js_unchecked(&h[i].probs, &h[j].probs)).exp()
        }
    });
    KernelMatrix::new(KernelKind::Qek, ds.graph_ids.clone(), k)
}

/// Excitation probability of a lone atom on resonance: sin²(πνT).
pub fn rabi_excitation_probability(rabi_mhz: f64, duration_us: f64) -> Result<f64> {
    if !(rabi_mhz >= 0.0) || !(duration_us >= 0.0) {
        return Err(Error::invalid("Rabi frequency and duration must be nonnegative"));
    }
    Ok((std::f64::consts::PI * rabi_mhz * duration_us).sin().powi(2))
}

/// P ⋆ Binomial(delta_n, p): the histogram after adding `delta_n`
/// independent atoms each excited with probability `p`.
pub fn convolve_binomial(probs: &[f64], delta_n: usize, p: f64) -> Result<Vec<f64>> {
    check_normalized(probs)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p must lie in [0, 1]"));
    }
    Ok(convolve(probs, &binomial_pmf(delta_n, p)))
}

/// QEK with the smaller graph of each pair padded by non-interacting atoms.
pub fn qek_size_compensated(ds: &DistributionSet, p: f64) -> Result<KernelMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p must lie in [0, 1]"));
    }
    let h = &ds.histograms;
    let n_max = ds.sizes().into_iter().max().unwrap_or(0);
    let binomials: Vec<Vec<f64>> = (0..=n_max).map(|d| binomial_pmf(d, p)).collect();
    let k = symmetric_from_fn(ds.len(), |i, j| {
        if i == j {
            return 1.0;
        }
        let (a, b) = (&h[i].probs, &h[j].probs);
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        let padded = convolve(small, &binomials[large.len() - small.len()]);
        (-js_unchecked(&padded, large)).exp()
    });
    KernelMatrix::new(KernelKind::QekConv, ds.graph_ids.clone(), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn set(hists: Vec<Vec<f64>>) -> DistributionSet {
        let ids = (0..hists.len()).collect();
        let h = hists
            .into_iter()
            .map(|p| ExcitationHistogram::new(p, None).unwrap())
            .collect();
        DistributionSet::new(ids, h).unwrap()
    }

    #[test]
    fn entropy_values() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - LN_2).abs() < 1e-15);
        let direct = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((shannon_entropy(&[0.75, 0.25]).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.5623).abs() < 1e-4);
        assert!(shannon_entropy(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn js_values() {
        assert_eq!(js_divergence(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert!((js_divergence(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - LN_2).abs() < 1e-15);
        // H(3/4, 1/4) − (0 + ln 2)/2
        let oracle = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln()) - 0.5 * LN_2;
        let js = js_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((js - oracle).abs() < 1e-15);
        assert!((js - 0.2157).abs() < 1e-4);
        // zero padding
        assert!((js_divergence(&[1.0], &[0.0, 1.0]).unwrap() - LN_2).abs() < 1e-15);
    }

    #[test]
    fn qek_matrix_basics() {
        let k = qek_matrix(&set(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        assert!((k.values[(0, 1)] - 0.5).abs() < 1e-15);
        assert_eq!(k.values[(0, 2)], 1.0);
        assert_eq!(k.values[(1, 1)], 1.0);
    }

    #[test]
    fn rabi_probability() {
        assert!((rabi_excitation_probability(1.0, 0.66).unwrap() - 0.768).abs() < 1e-3);
        assert_eq!(rabi_excitation_probability(1.0, 0.0).unwrap(), 0.0);
        assert!(rabi_excitation_probability(1.0, 1.0).unwrap() < 1e-30);
    }

    #[test]
    fn binomial_convolution() {
        assert_eq!(convolve_binomial(&[0.3, 0.7], 0, 0.4).unwrap(), vec![0.3, 0.7]);
        assert_eq!(convolve_binomial(&[1.0], 2, 0.5).unwrap(), vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn non_interacting_binomials_are_a_fixed_point() {
        let p = 0.768;
        let k = qek_size_compensated(
            &set(vec![binomial_pmf(3, p), binomial_pmf(7, p), binomial_pmf(12, p)]),
            p,
        )
        .unwrap();
        for v in k.values.iter() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let plain = qek_matrix(&set(vec![binomial_pmf(3, p), binomial_pmf(7, p)])).unwrap();
        assert!(plain.values[(0, 1)] < 0.9);
    }

    #[test]
    fn equal_sizes_match_plain_qek() {
        let s = set(vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]]);
        let a = qek_matrix(&s).unwrap();
        let b = qek_size_compensated(&s, 0.3).unwrap();
        assert!((a.values[(0, 1)] - b.values[(0, 1)]).abs() < 1e-15);
    }
}
