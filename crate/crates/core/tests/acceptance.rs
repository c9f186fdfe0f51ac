//! Acceptance criteria, one test per criterion. Each test prints a single
//! `[criterion N] PASS|FAIL ...` line.
//!
//! Criteria on the PTC-FM molecules read the TU files from `QEK_PTC_FM_DIR`
//! (default `data/PTC_FM` relative to the workspace root) and fail when the
//! dataset is absent.

mod common;

use std::io::Write;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DMatrix;
use qek_core::experiments::{
    classical_kernels, embed_dataset, run_geodiff, run_ptcfm, run_synth, run_wl_demo, KernelSettings, OutputDir,
    PtcFmConfig, PtcFmResult, SynthConfig, WlDemoConfig,
};
use qek_core::graphs::synthetic::generate_synthetic_samples;
use qek_core::graphs::{load_tudataset, truncate_dataset, Graph, GraphDataset};
use qek_core::kernels::{
    check_psd, qek_matrix, qek_size_compensated, rabi_excitation_probability, DistributionSet, KernelKind,
};
use qek_core::layout::{
    batch_to_slm, cluster_dataset, induced_lattice_graph, Layout, LayoutConfig, SimilarityWeights, SlmConfig,
};
use qek_core::ml::{simulate_histograms, svm_predict, svm_train, CvConfig};
use qek_core::rydsim::{
    detection_transition_probability, evolve, evolve_dense, interaction_strength, AtomRegister, NoiseModel, Pulse,
    SimConfig, DEFAULT_C6_OVER_H,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u32, pass: bool, detail: impl AsRef<str>) {
    let line = format!(
        "[criterion {criterion:>2}] {} {}\n",
        if pass { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    // Written past the test harness capture so passing lines show too.
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {criterion} failed: {}", detail.as_ref());
}

fn ptcfm_dir() -> PathBuf {
    std::env::var_os("QEK_PTC_FM_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/PTC_FM"))
}

fn ptcfm_full() -> Result<GraphDataset, String> {
    let dir = ptcfm_dir();
    load_tudataset(&dir).map_err(|e| format!("PTC-FM dataset not available at {}: {e}", dir.display()))
}

/// The noiseless PTC-FM pipeline at the default qubit ceiling, run once and
/// shared by the criteria that need it.
fn ptcfm_run() -> &'static Result<PtcFmResult, String> {
    static RUN: OnceLock<Result<PtcFmResult, String>> = OnceLock::new();
    RUN.get_or_init(|| {
        ptcfm_full()?;
        let out_dir = std::env::temp_dir().join("qek-acceptance-ptcfm");
        let out = OutputDir::create(&out_dir, "acceptance", 0).map_err(|e| e.to_string())?;
        let config = PtcFmConfig { data_dir: ptcfm_dir(), ..PtcFmConfig::default() };
        run_ptcfm(
            &config,
            &LayoutConfig::default(),
            &SlmConfig::default(),
            &KernelSettings::default(),
            &NoiseModel::noiseless(),
            &SimConfig::default(),
            &CvConfig::default(),
            0,
            &out,
        )
        .map_err(|e| e.to_string())
    })
}

fn row<'a>(r: &'a PtcFmResult, kernel: &str) -> Option<&'a qek_core::experiments::ScoreRow> {
    r.rows.iter().find(|x| x.kernel == kernel)
}

#[test]
fn criterion_01_simulator_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = SimConfig::default();
    let mut worst = 1.0f64;
    let mut count = 0;
    while count < 200 {
        let n = rng.random_range(1..=8);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>() * 20.0, rng.random::<f64>() * 20.0]).collect();
        let too_close = (0..n).any(|i| (0..i).any(|j| (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]) < 4.0));
        if too_close {
            continue;
        }
        let reg = AtomRegister::new(pts).unwrap();
        let pulse = Pulse::new(rng.random::<f64>() * 3.0, rng.random::<f64>() * 6.0 - 3.0, rng.random::<f64>() * 3.0).unwrap();
        let f = evolve(&reg, &pulse, &cfg).unwrap().fidelity(&evolve_dense(&reg, &pulse).unwrap());
        worst = worst.min(f);
        count += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        worst >= 1.0 - 1e-8 && secs < 60.0,
        format!("200 registers, worst fidelity 1 - {:.2e}, {secs:.1} s", 1.0 - worst),
    );
}

fn window_mean(times: &[f64], ys: &[f64], lo: f64, hi: f64) -> f64 {
    let picked: Vec<f64> = times.iter().zip(ys).filter(|(t, _)| **t >= lo && **t <= hi).map(|(_, y)| *y).collect();
    picked.iter().sum::<f64>() / picked.len() as f64
}

#[test]
fn criterion_02_wl_pair_experiment() {
    let r = run_wl_demo(&WlDemoConfig::default(), &NoiseModel::default(), &SimConfig::default(), 0, None).unwrap();
    let nb1 = window_mean(&r.times, &r.n_border[0], 0.5, 2.5);
    let nb2 = window_mean(&r.times, &r.n_border[1], 0.5, 2.5);
    let pass = (0.20..=0.36).contains(&r.js_max)
        && (0.45..=0.70).contains(&r.t_star)
        && (nb1 - 0.15).abs() <= 0.07
        && (nb2 - 0.25).abs() <= 0.07;
    report(
        2,
        pass,
        format!("JS_max {:.3} at t* {:.3} us; mean n_B {nb1:.3} (G1) vs {nb2:.3} (G2)", r.js_max, r.t_star),
    );
}

#[test]
fn criterion_03_nn_mean_field_degeneracy() {
    let cfg = WlDemoConfig { noiseless: true, shots: 1, ..WlDemoConfig::default() };
    let r = run_wl_demo(&cfg, &NoiseModel::noiseless(), &SimConfig::default(), 0, None).unwrap();
    let max_diff = |a: &[f64], b: &[f64], lo: f64| {
        r.times
            .iter()
            .zip(a.iter().zip(b))
            .filter(|(t, _)| **t >= lo && **t <= 2.5)
            .map(|(_, (x, y))| (x - y).abs())
            .fold(0.0f64, f64::max)
    };
    let nn = max_diff(&r.mean_field_nn_border[0], &r.mean_field_nn_border[1], 0.0)
        .max(max_diff(&r.mean_field_nn_center[0], &r.mean_field_nn_center[1], 0.0));
    let full = max_diff(&r.mean_field_border[0], &r.mean_field_border[1], 0.5)
        .max(max_diff(&r.mean_field_center[0], &r.mean_field_center[1], 0.5));
    report(
        3,
        nn <= 1e-6 && full >= 0.01,
        format!("NN-only max difference {nn:.2e}, full-interaction max difference {full:.3}"),
    );
}

#[test]
fn criterion_04_classical_kernel_scores() {
    let r = match ptcfm_run() {
        Ok(r) => r,
        Err(e) => return report(4, false, e),
    };
    let targets = [("SVM-theta", 0.582), ("Size", 0.567), ("GS", 0.569), ("RW", 0.551), ("SP", 0.498)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, target) in targets {
        let f1 = row(r, name).map_or(f64::NAN, |x| x.mean_f1);
        pass &= (f1 - target).abs() <= 0.06;
        parts.push(format!("{name} {:.1}", 100.0 * f1));
    }
    report(4, pass, format!("{} graphs: {}", r.n_graphs, parts.join(", ")));
}

#[test]
fn criterion_05_qek_score() {
    let r = match ptcfm_run() {
        Ok(r) => r,
        Err(e) => return report(5, false, e),
    };
    let qek = row(r, "QEK").map_or(f64::NAN, |x| x.mean_f1);
    let conv = row(r, "QEK-conv").map_or(f64::NAN, |x| x.mean_f1);
    let pass = (0.52..=0.68).contains(&qek) && (r.best_t - 0.66).abs() <= 0.3 && (0.40..=0.50).contains(&conv);
    report(5, pass, format!("QEK {:.1} at T = {} us, size-compensated {:.1}", 100.0 * qek, r.best_t, 100.0 * conv));
}

fn kernel_is_sane(k: &DMatrix<f64>, unit_diagonal: bool) -> Result<f64, String> {
    let n = k.nrows();
    for i in 0..n {
        for j in 0..i {
            if k[(i, j)] != k[(j, i)] {
                return Err(format!("asymmetric at ({i}, {j})"));
            }
        }
        if unit_diagonal && k[(i, i)] != 1.0 {
            return Err(format!("diagonal {i} is {}", k[(i, i)]));
        }
    }
    let (psd, min) = check_psd(k, 1e-8).map_err(|e| e.to_string())?;
    if psd {
        Ok(min)
    } else {
        Err(format!("min eigenvalue {min:e}"))
    }
}

#[test]
fn criterion_06_kernel_sanity() {
    let samples = generate_synthetic_samples(0.2, 15, 8, 3).unwrap();
    let registers: Vec<AtomRegister> =
        samples.iter().map(|s| AtomRegister::new(s.positions(5.0)).unwrap()).collect();
    let ds = GraphDataset::new("synthetic", "", samples.into_iter().map(|s| s.graph).collect());
    let t = 0.8;
    let pulse = Pulse::new(1.0, 0.0, t).unwrap();
    let hists = simulate_histograms(&registers, &[pulse], &[t], None, &SimConfig::default(), 0).unwrap();
    let dist = DistributionSet::new((0..ds.len()).collect(), hists.into_iter().next().unwrap()).unwrap();
    let mut kernels = vec![
        qek_matrix(&dist).unwrap(),
        qek_size_compensated(&dist, rabi_excitation_probability(1.0, t).unwrap()).unwrap(),
    ];
    kernels.extend(classical_kernels(&ds, &KernelSettings::default()).unwrap());
    let mut pass = kernels.len() == 7;
    let mut parts = Vec::new();
    for k in &kernels {
        let unit = matches!(k.kind, KernelKind::Qek | KernelKind::QekConv);
        match kernel_is_sane(&k.values, unit) {
            Ok(min) => parts.push(format!("{} min eig {min:.1e}", k.kind.name())),
            Err(e) => {
                pass = false;
                parts.push(format!("{} {e}", k.kind.name()));
            }
        }
    }
    report(6, pass, format!("{} kernels on {} graphs: {}", kernels.len(), ds.len(), parts.join("; ")));
}

#[test]
fn criterion_07_geometric_difference() {
    let r = match ptcfm_run() {
        Ok(r) => r,
        Err(e) => return report(7, false, e),
    };
    let qek = r.kernels.iter().find(|k| k.kind == KernelKind::Qek).unwrap();
    let classical: Vec<_> = r
        .kernels
        .iter()
        .filter(|k| !matches!(k.kind, KernelKind::Qek | KernelKind::QekConv))
        .cloned()
        .collect();
    let self_g = qek_core::geometry::geometric_difference_reg(&qek.values, &qek.values, 0.0)
        .map(|g| g.g12)
        .unwrap_or(f64::NAN);
    let gd = run_geodiff(qek, &classical, r.qek_c, &Default::default(), &CvConfig::default(), None).unwrap();
    let expected = |name: &str| if name == "SVM-theta" { (2.0, 4.0) } else { (3.0, 6.0) };
    let mut pass = (self_g - 1.0).abs() <= 1e-8;
    let mut parts = vec![format!("g(K_Q,K_Q) = {self_g:.9}")];
    for row in &gd.rows {
        let decade = row.g12.log10();
        let (lo, hi) = expected(&row.kernel);
        pass &= row.g12 >= 100.0 && decade >= lo && decade <= hi;
        parts.push(format!("{} {:.1e}", row.kernel, row.g12));
    }
    report(7, pass, parts.join(", "));
}

#[test]
fn criterion_08_relabeling_separation() {
    let r = match ptcfm_run() {
        Ok(r) => r,
        Err(e) => return report(8, false, e),
    };
    let qek = r.kernels.iter().find(|k| k.kind == KernelKind::Qek).unwrap();
    let classical: Vec<_> = r
        .kernels
        .iter()
        .filter(|k| !matches!(k.kind, KernelKind::Qek | KernelKind::QekConv))
        .cloned()
        .collect();
    let gd = run_geodiff(qek, &classical, r.qek_c, &Default::default(), &CvConfig::default(), None).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for row in &gd.rows {
        let (q, c) = (row.qek_f1.unwrap_or(f64::NAN), row.classical_f1.unwrap_or(f64::NAN));
        pass &= q >= 0.95 && q - c >= 0.10;
        parts.push(format!("{}: QEK {:.1} vs {:.1}", row.kernel, 100.0 * q, 100.0 * c));
    }
    report(8, pass, parts.join(", "));
}

#[test]
fn criterion_09_synthetic_dataset() {
    let start = Instant::now();
    let r = run_synth(
        &SynthConfig::default(),
        &KernelSettings::default(),
        &NoiseModel::noiseless(),
        &SimConfig::default(),
        &CvConfig::default(),
        0,
        None,
    )
    .unwrap();
    // The size kernel is constant on fixed-size graphs, so it is left out.
    let compared = ["SVM-theta", "GS", "RW", "SP"];
    let best_classical = |p: f64| compared.iter().map(|k| r.score(p, k).unwrap()).fold(f64::NEG_INFINITY, f64::max);
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [0.1, 0.2] {
        let gap = r.score(p, "QEK").unwrap() - best_classical(p);
        pass &= gap >= 0.03;
        parts.push(format!("gap at p={p}: {:+.1}", 100.0 * gap));
    }
    let p0 = &r.points[0];
    let p0_min = ["QEK"].iter().chain(&compared).map(|k| r.score(p0.p, k).unwrap()).fold(1.0, f64::min);
    pass &= p0_min >= 0.9995;
    parts.push(format!("p=0 min F1 {:.1}", 100.0 * p0_min));
    // Degradation toward p = 0.5, allowing 2 points of cross-validation noise
    // between neighbouring bias values.
    let series = |name: &str| -> Vec<f64> { r.points.iter().map(|pt| r.score(pt.p, name).unwrap()).collect() };
    let mut rising = Vec::new();
    for name in ["QEK"].iter().chain(&compared) {
        let s = series(name);
        if !(s.windows(2).all(|w| w[1] <= w[0] + 0.02) && s.last() < s.first()) {
            rising.push(*name);
        }
    }
    pass &= rising.is_empty();
    parts.push(format!("not monotone: {rising:?}"));
    for pt in &r.points {
        parts.push(format!("p={} QEK {:.1} best {:.1}", pt.p, 100.0 * r.score(pt.p, "QEK").unwrap(), 100.0 * best_classical(pt.p)));
    }
    parts.push(format!("{:.0} s", start.elapsed().as_secs_f64()));
    report(9, pass, parts.join(", "));
}

#[test]
fn criterion_10_layout_quality() {
    let full = match ptcfm_full() {
        Ok(d) => d,
        Err(e) => return report(10, false, e),
    };
    let ds = truncate_dataset(&full, SimConfig::default().qubit_ceiling).unwrap();
    let embedded = embed_dataset(&ds, &LayoutConfig::default(), 0).unwrap();
    let n = embedded.len() as f64;
    let before = embedded.iter().map(|e| e.ratio_before).sum::<f64>() / n;
    let after = embedded.iter().map(|e| e.ratio_after).sum::<f64>() / n;
    let above10 = embedded.iter().filter(|e| e.ratio_after > 10.0).count() as f64 / n;
    let below1 = embedded.iter().filter(|e| e.ratio_after < 1.0).count() as f64 / n;
    let pass = (5.0..=7.0).contains(&before) && after >= 10.0 && above10 >= 0.5 && below1 < 0.05;
    report(
        10,
        pass,
        format!(
            "mean ratio {before:.2} -> {after:.2}, {:.0}% above 10, {:.1}% below 1",
            100.0 * above10,
            100.0 * below1
        ),
    );
}

#[test]
fn criterion_11_batching() {
    let full = match ptcfm_full() {
        Ok(d) => d,
        Err(e) => return report(11, false, e),
    };
    let embedded = embed_dataset(&full, &LayoutConfig::default(), 0).unwrap();
    let slm = SlmConfig::default();
    let clusters = cluster_dataset(&full, 6.min(full.len()), 0.5, &SimilarityWeights::default(), 0).unwrap();
    let mut traps = Vec::new();
    let mut mismatched = Vec::new();
    let mut unplaced = Vec::new();
    for members in &clusters {
        let mut batch: Vec<(usize, &Graph, &Layout)> =
            members.iter().map(|&i| (i, &full.graphs[i], &embedded[i].layout)).collect();
        let pattern = loop {
            match batch_to_slm(&batch, &slm) {
                Ok(p) => break Some(p),
                Err(qek_core::Error::Placement { graph_id, .. }) => {
                    unplaced.push(graph_id);
                    batch.retain(|b| b.0 != graph_id);
                    if batch.is_empty() {
                        break None;
                    }
                }
                Err(e) => panic!("{e}"),
            }
        };
        if let Some(p) = pattern {
            traps.push(p.trap_count());
            for (&id, sites) in &p.assignments {
                let induced = induced_lattice_graph(sites).unwrap();
                if embedded[id].ratio_before > 1.0 && induced.edges() != full.graphs[id].edges() {
                    mismatched.push(id);
                }
            }
        }
    }
    let mean_traps = traps.iter().sum::<usize>() as f64 / traps.len().max(1) as f64;
    let pass = traps.len() <= 8 && mean_traps <= 90.0 && mismatched.is_empty() && unplaced.is_empty();
    report(
        11,
        pass,
        format!(
            "{} patterns, {mean_traps:.1} traps on average, {} mismatched and {} unplaced graphs",
            traps.len(),
            mismatched.len(),
            unplaced.len()
        ),
    );
}

#[test]
fn criterion_12_svm_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst_obj = 0.0f64;
    let mut disagreements = 0;
    for _ in 0..100 {
        let pts: Vec<[f64; 2]> = (0..5).map(|_| [rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0]).collect();
        let mut y: Vec<f64> = (0..5).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let c = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        let kern = |a: &[f64; 2], b: &[f64; 2]| (-((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))).exp();
        let k = DMatrix::from_fn(5, 5, |i, j| kern(&pts[i], &pts[j]));
        let model = svm_train(&k, &y, c).unwrap();
        let oracle = common::brute_force_svm(&k, &y, c);
        worst_obj = worst_obj.max((model.dual_objective(&k) - oracle.objective).abs());
        let test: Vec<[f64; 2]> = (0..5).map(|_| [rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0]).collect();
        let cross = DMatrix::from_fn(10, 5, |r, j| if r < 5 { k[(r, j)] } else { kern(&test[r - 5], &pts[j]) });
        let ours = svm_predict(&model, &cross).unwrap();
        for (r, p) in ours.iter().enumerate() {
            let f: f64 = (0..5).map(|j| oracle.alphas[j] * y[j] * cross[(r, j)]).sum::<f64>() + oracle.bias;
            let theirs = if f >= 0.0 { 1.0 } else { -1.0 };
            if *p != theirs {
                disagreements += 1;
            }
        }
    }
    report(
        12,
        worst_obj <= 1e-4 && disagreements == 0,
        format!("worst dual objective gap {worst_obj:.2e}, {disagreements} prediction disagreements"),
    );
}

#[test]
fn criterion_13_unit_fixpoints() {
    let p = rabi_excitation_probability(1.0, 0.66).unwrap();
    let u = interaction_strength(5.3, DEFAULT_C6_OVER_H).unwrap();
    let measured = u64::from_str_radix("1001", 2).unwrap();
    let prepared = u64::from_str_radix("0101", 2).unwrap();
    let t = detection_transition_probability(measured, prepared, 4, 0.03, 0.08).unwrap();
    let pass = (p - 0.768).abs() <= 0.001 && (u - 6.2).abs() <= 0.1 && (t - 0.00214).abs() <= 1e-5;
    report(13, pass, format!("sin^2 = {p:.4}, U(5.3 um) = {u:.3} MHz, P(1001|0101) = {t:.6}"));
}
