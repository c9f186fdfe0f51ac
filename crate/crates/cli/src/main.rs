use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use qek_core::experiments::{
    embed_dataset, load_ptcfm_run, run_geodiff, run_ptcfm, run_synth, run_wl_demo,
    ExperimentConfig, OutputDir,
};
use qek_core::graphs::{load_tudataset, truncate_dataset, Graph, GraphDataset};
use qek_core::kernels::{
    check_psd, graphlet_sampling_kernel, qek_matrix, random_walk_kernel, shortest_path_kernel,
    size_kernel, svm_theta_kernel, DistributionSet, KernelKind,
};
use qek_core::layout::{batch_to_slm, cluster_dataset, Layout, SimilarityWeights};
use qek_core::rydsim::NoiseModel;

#[derive(Parser)]
#[command(name = "qek", version, about = "Quantum evolution kernel experiments on simulated neutral-atom registers")]
struct Cli {
    /// TOML experiment config; omitted sections take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Largest register the simulator accepts.
    #[arg(long, global = true)]
    qubit_ceiling: Option<usize>,
    /// Drop dephasing and readout errors everywhere.
    #[arg(long, global = true)]
    noiseless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Excitation statistics of a pair of graphs that 1-WL cannot separate.
    WlDemo {
        /// Run the pair in reversed order.
        #[arg(long)]
        swap_graphs: bool,
    },
    /// Molecule classification: layouts, histograms, kernels and scores.
    Ptcfm(PtcFmArgs),
    /// Geometric difference between the QEK and classical kernels.
    Geodiff {
        /// Output directory of an earlier `ptcfm` run to take kernels from.
        #[arg(long)]
        kernels_dir: Option<PathBuf>,
    },
    /// Synthetic honeycomb/kagome benchmark over a range of biases.
    Synth {
        /// Comma-separated bias values, replacing the configured grid.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long)]
        per_class: Option<usize>,
        #[arg(long)]
        n_nodes: Option<usize>,
        /// Also train the four-layer pulse scheme.
        #[arg(long)]
        layered: bool,
    },
    /// Embed a TU dataset and optionally batch it onto trap patterns.
    Layout {
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Graphs with more nodes are dropped; defaults to the qubit ceiling.
        #[arg(long)]
        max_nodes: Option<usize>,
        #[arg(long)]
        batch: bool,
    },
    /// One kernel matrix from a graph dataset or a histogram file.
    Kernel(KernelArgs),
    /// Print the effective config as TOML.
    ShowConfig,
}

#[derive(Args)]
struct PtcFmArgs {
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Snap layouts onto shared trap patterns.
    #[arg(long)]
    batch: bool,
    /// Recompute layouts and histograms even when cached.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args)]
struct KernelArgs {
    /// QEK, SVM-theta, Size, GS, RW or SP.
    #[arg(long)]
    kind: String,
    /// Graph dataset JSON, for the classical kernels.
    #[arg(long)]
    graphs: Option<PathBuf>,
    /// Histogram records JSON, for the QEK.
    #[arg(long)]
    histograms: Option<PathBuf>,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    if let Some(dir) = &cli.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(c) = cli.qubit_ceiling {
        config.sim.qubit_ceiling = c;
    }
    if cli.noiseless {
        config.noise = NoiseModel::noiseless();
        config.wl_demo.noiseless = true;
        config.ptcfm.noisy = false;
        config.synth.noisy = false;
    }
    match &cli.command {
        Command::WlDemo { swap_graphs } => config.wl_demo.swap_graphs |= swap_graphs,
        Command::Ptcfm(a) => {
            if let Some(d) = &a.data_dir {
                config.ptcfm.data_dir = d.clone();
            }
            if a.max_nodes.is_some() {
                config.ptcfm.max_nodes = a.max_nodes;
            }
            config.ptcfm.batching |= a.batch;
            config.ptcfm.use_cache &= !a.no_cache;
        }
        Command::Geodiff { kernels_dir } => {
            if kernels_dir.is_some() {
                config.geodiff.kernels_dir = kernels_dir.clone();
            }
        }
        Command::Synth { p, per_class, n_nodes, layered } => {
            if let Some(p) = p {
                config.synth.p_grid = p.clone();
            }
            if let Some(n) = per_class {
                config.synth.per_class = *n;
            }
            if let Some(n) = n_nodes {
                config.synth.n_nodes = *n;
            }
            config.synth.layered |= layered;
        }
        Command::Layout { data_dir, max_nodes, batch } => {
            if let Some(d) = data_dir {
                config.ptcfm.data_dir = d.clone();
            }
            if max_nodes.is_some() {
                config.ptcfm.max_nodes = *max_nodes;
            }
            config.ptcfm.batching |= batch;
        }
        Command::Kernel(_) | Command::ShowConfig => {}
    }
    Ok(config)
}

/// SHA-256 of the effective config serialized as JSON.
fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let json = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(&json)))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let config = load_config(&cli)?;
    if let Command::ShowConfig = cli.command {
        print!("{}", toml::to_string(&config)?);
        return Ok(());
    }
    let hash = config_hash(&config)?;
    let out = OutputDir::create(&config.out_dir, hash.clone(), config.seed)?;
    out.write_json("config.json", &config)?;
    log::info!("config hash {hash}, writing to {}", out.dir().display());
    match &cli.command {
        Command::WlDemo { .. } => {
            let r = run_wl_demo(&config.wl_demo, &config.noise, &config.sim, config.seed, Some(&out))?;
            println!("JS_max = {:.4} at t* = {:.3} us", r.js_max, r.t_star);
        }
        Command::Ptcfm(_) => {
            let r = ptcfm(&config, &out)?;
            println!("best T = {} us over {} graphs", r.best_t, r.n_graphs);
            for row in &r.rows {
                println!("{:<10} F1 = {:.4} ± {:.4}", row.kernel, row.mean_f1, row.std_f1);
            }
        }
        Command::Geodiff { .. } => geodiff(&config, &out)?,
        Command::Synth { .. } => {
            let r = run_synth(&config.synth, &config.kernels, &config.noise, &config.sim, &config.cv, config.seed, Some(&out))?;
            for pt in &r.points {
                for row in &pt.rows {
                    println!("p = {:<4} {:<12} F1 = {:.4} ± {:.4}", pt.p, row.kernel, row.mean_f1, row.std_f1);
                }
            }
        }
        Command::Layout { .. } => layout(&config, &out)?,
        Command::Kernel(args) => kernel(args, &config, &out)?,
        Command::ShowConfig => unreachable!(),
    }
    Ok(())
}

fn ptcfm(config: &ExperimentConfig, out: &OutputDir) -> Result<qek_core::experiments::PtcFmResult> {
    Ok(run_ptcfm(
        &config.ptcfm,
        &config.layout,
        &config.slm,
        &config.kernels,
        &config.noise,
        &config.sim,
        &config.cv,
        config.seed,
        out,
    )?)
}

fn geodiff(config: &ExperimentConfig, out: &OutputDir) -> Result<()> {
    let run = match &config.geodiff.kernels_dir {
        Some(dir) => load_ptcfm_run(dir).with_context(|| format!("loading kernels from {}", dir.display()))?,
        None => ptcfm(config, out)?,
    };
    let qek = run
        .kernels
        .iter()
        .find(|k| k.kind == KernelKind::Qek)
        .context("run has no QEK matrix")?;
    let classical: Vec<_> = run
        .kernels
        .iter()
        .filter(|k| !matches!(k.kind, KernelKind::Qek | KernelKind::QekConv))
        .cloned()
        .collect();
    let r = run_geodiff(qek, &classical, run.qek_c, &config.geodiff, &config.cv, Some(out))?;
    for row in &r.rows {
        println!(
            "{:<10} g12 = {:.3e}  relabeled F1: QEK {}  classical {}",
            row.kernel,
            row.g12,
            fmt_opt(row.qek_f1),
            fmt_opt(row.classical_f1)
        );
    }
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{v:.4}"))
}

fn layout(config: &ExperimentConfig, out: &OutputDir) -> Result<()> {
    let full = load_tudataset(&config.ptcfm.data_dir)?;
    let ds = truncate_dataset(&full, config.ptcfm.max_nodes.unwrap_or(config.sim.qubit_ceiling))?;
    let embedded = embed_dataset(&ds, &config.layout, config.seed)?;
    out.write_json("layouts.json", &embedded)?;
    let rows: Vec<Vec<String>> = embedded
        .iter()
        .enumerate()
        .map(|(i, e)| vec![i.to_string(), e.ratio_before.to_string(), e.ratio_after.to_string()])
        .collect();
    out.write_csv("layout_ratios.csv", &["graph_id", "ratio_before", "ratio_after"], &rows)?;
    let n = embedded.len().max(1) as f64;
    println!(
        "{} graphs, mean ratio {:.2} -> {:.2}",
        embedded.len(),
        embedded.iter().map(|e| e.ratio_before).sum::<f64>() / n,
        embedded.iter().map(|e| e.ratio_after).sum::<f64>() / n
    );
    if config.ptcfm.batching {
        let clusters = cluster_dataset(
            &ds,
            config.ptcfm.n_batches.min(ds.len()),
            config.ptcfm.cluster_alpha,
            &SimilarityWeights::default(),
            config.seed,
        )?;
        let mut patterns = Vec::new();
        for members in clusters {
            let batch: Vec<(usize, &Graph, &Layout)> =
                members.iter().map(|&i| (i, &ds.graphs[i], &embedded[i].layout)).collect();
            let p = batch_to_slm(&batch, &config.slm)?;
            println!("pattern {}: {} graphs on {} traps", patterns.len(), members.len(), p.trap_count());
            patterns.push(p);
        }
        out.write_json("slm_patterns.json", &patterns)?;
    }
    Ok(())
}

fn read_graphs(path: &Path) -> Result<GraphDataset> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(GraphDataset::from_json(&text)?)
}

fn kernel(args: &KernelArgs, config: &ExperimentConfig, out: &OutputDir) -> Result<()> {
    let kind = KernelKind::from_name(&args.kind).with_context(|| format!("unknown kernel {:?}", args.kind))?;
    let settings = &config.kernels;
    let k = if kind == KernelKind::Qek {
        let path = args.histograms.as_deref().context("the QEK needs --histograms")?;
        qek_matrix(&DistributionSet::read_json(path)?)?
    } else {
        let path = args.graphs.as_deref().context("classical kernels need --graphs")?;
        let ds = read_graphs(path)?;
        match kind {
            KernelKind::SvmTheta => svm_theta_kernel(&ds, &settings.svm_theta)?,
            KernelKind::Size => size_kernel(&ds, settings.size_gamma)?,
            KernelKind::Graphlet => graphlet_sampling_kernel(&ds, &settings.graphlet)?,
            KernelKind::RandomWalk => random_walk_kernel(&ds, settings.random_walk)?,
            KernelKind::ShortestPath => shortest_path_kernel(&ds, settings.shortest_path_c)?,
            KernelKind::Qek | KernelKind::QekConv => bail!("{} is built by the ptcfm pipeline", kind.name()),
        }
    };
    let (psd, min_eig) = check_psd(&k.values, 1e-8)?;
    out.write_kernel(&format!("kernel_{}", kind.name()), &k, serde_json::json!({ "min_eigenvalue": min_eig }))?;
    println!("{} kernel over {} graphs, min eigenvalue {min_eig:.3e}{}", kind.name(), k.len(), if psd { "" } else { " (not PSD)" });
    Ok(())
}
