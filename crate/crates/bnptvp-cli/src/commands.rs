use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use bnptvp::diagnostics::{geweke_joint_test, summarize};
use bnptvp::gibbs::{run_chain_with_progress, GibbsError, Hyperparameters, McmcSettings, ModelSpec, SpikeVariant};
use bnptvp::graphs::{export_graph, extract_graphs, ExportFormat, GraphMode};
use bnptvp::io::{read_draws, read_panel, write_draws, PosteriorDraws, RunConfig};
use bnptvp::var_core::{generate_synthetic, SyntheticConfig};

#[derive(Debug)]
pub enum CommandError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Usage(m) | CommandError::Data(m) | CommandError::Numerical(m) => {
                write!(f, "{m}")
            }
        }
    }
}

fn usage(msg: impl Into<String>) -> CommandError {
    CommandError::Usage(msg.into())
}

fn data(msg: impl std::fmt::Display) -> CommandError {
    CommandError::Data(msg.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "bnptvp",
    about = "Sparse Bayesian nonparametric time-varying VAR: synthetic data, posterior sampling, Granger graphs, diagnostics",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic sparse TVP-VAR panel plus its ground truth.
    Simulate(SimulateArgs),
    /// Run the Gibbs sampler on a CSV panel and persist the draws.
    Fit(FitArgs),
    /// Extract per-time Granger graphs from a draws directory.
    Graphs(GraphsArgs),
    /// Summaries, convergence diagnostics, and the sampler validation report.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Number of series.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Number of time points.
    #[arg(long = "t-len", default_value_t = 100)]
    pub t_len: usize,
    /// Fraction of coefficients forced to zero, in [0, 1].
    #[arg(long, default_value_t = 0.8)]
    pub sparsity: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (panel.csv + truth.json).
    #[arg(long)]
    pub out: PathBuf,
    /// Emit the system even when the stationarity diagnostic fails.
    #[arg(long, default_value_t = false)]
    pub allow_explosive: bool,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Input panel CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Optional key=value config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Spike variant: dirac | normal | de.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub iters: Option<u64>,
    #[arg(long = "burn-in")]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub thin: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Independent chains, run concurrently with seeds seed+0, seed+1, ...
    #[arg(long)]
    pub chains: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub demean: Option<bool>,
    #[arg(long)]
    pub standardize: Option<bool>,
    /// Progress line to stderr every N sweeps (0 disables).
    #[arg(long = "progress-every")]
    pub progress_every: Option<u64>,
}

#[derive(Args, Debug)]
pub struct GraphsArgs {
    /// Draws directory produced by `fit`.
    #[arg(long)]
    pub draws: PathBuf,
    /// dot | graphml | json
    #[arg(long, default_value = "dot")]
    pub format: String,
    /// Inclusion-probability threshold for binary graphs.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// binary | weighted
    #[arg(long, default_value = "binary")]
    pub mode: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    /// One or more draws directories (several enable split R-hat).
    #[arg(long, required = true, num_args = 1..)]
    pub draws: Vec<PathBuf>,
    /// Output directory for summary.csv and geweke.txt.
    #[arg(long)]
    pub out: PathBuf,
    /// Sweeps for the joint-distribution validation run (0 skips it).
    #[arg(long = "geweke-sweeps", default_value_t = 20_000)]
    pub geweke_sweeps: u64,
    #[arg(long = "geweke-seed", default_value_t = 0)]
    pub geweke_seed: u64,
}

pub fn run(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Graphs(args) => cmd_graphs(args),
        Command::Diagnose(args) => cmd_diagnose(args),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CommandError> {
    if !(0.0..=1.0).contains(&args.sparsity) {
        return Err(usage(format!(
            "--sparsity {} outside [0, 1]",
            args.sparsity
        )));
    }
    if args.n == 0 || args.t_len < 3 {
        return Err(usage("--n must be >= 1 and --t-len >= 3"));
    }
    println!(
        "effective-config: simulate n={} t_len={} sparsity={} seed={} out={} allow_explosive={}",
        args.n,
        args.t_len,
        args.sparsity,
        args.seed,
        args.out.display(),
        args.allow_explosive
    );
    let (panel, truth) = generate_synthetic(&SyntheticConfig {
        dim: args.n,
        t_len: args.t_len,
        sparsity: args.sparsity,
        seed: args.seed,
        allow_explosive: args.allow_explosive,
    })
    .map_err(|e| CommandError::Numerical(e.to_string()))?;
    std::fs::create_dir_all(&args.out).map_err(data)?;
    let mut csv = panel.names.join(",");
    csv.push('\n');
    for t in 0..panel.len() {
        let row: Vec<String> = (0..panel.dim())
            .map(|i| format!("{:.17e}", panel.values[(t, i)]))
            .collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    std::fs::write(args.out.join("panel.csv"), csv).map_err(data)?;
    let truth_json = serde_json::to_string_pretty(&truth).map_err(data)?;
    std::fs::write(args.out.join("truth.json"), truth_json).map_err(data)?;
    if truth.lyapunov == f64::NEG_INFINITY {
        println!("lyapunov-estimate: -inf (coefficient product annihilates)");
    } else {
        println!("lyapunov-estimate: {:.4}", truth.lyapunov);
    }
    println!("wrote {}", args.out.join("panel.csv").display());
    Ok(())
}

fn worker_cap() -> usize {
    std::env::var("BNPTVP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|v| *v >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn cmd_fit(args: FitArgs) -> Result<(), CommandError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_file(path).map_err(|e| usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(v) = &args.input {
        config.input = v.clone();
    }
    if let Some(v) = &args.variant {
        config.variant = SpikeVariant::parse(v)
            .ok_or_else(|| usage(format!("unknown variant {v:?} (dirac | normal | de)")))?;
    }
    if let Some(v) = args.iters {
        config.iters = v;
    }
    if let Some(v) = args.burn_in {
        config.burn_in = v;
    }
    if let Some(v) = args.thin {
        config.thin = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.chains {
        config.chains = v;
    }
    if let Some(v) = &args.out {
        config.out = v.clone();
    }
    if let Some(v) = args.demean {
        config.demean = v;
    }
    if let Some(v) = args.standardize {
        config.standardize = v;
    }
    if let Some(v) = args.progress_every {
        config.progress_every = v;
    }
    config.validate().map_err(|e| usage(e.to_string()))?;

    let panel = read_panel(&config.input, config.demean, config.standardize).map_err(data)?;
    let mut spec = ModelSpec::new(panel.dim(), panel.len(), config.variant);
    apply_hyper_overrides(&mut spec.hyper, &config);
    spec.validate().map_err(|e| usage(e.to_string()))?;

    println!(
        "effective-config: fit input={} variant={} iters={} burn_in={} thin={} seed={} chains={} demean={} standardize={} n={} t_len={}",
        config.input.display(),
        config.variant.name(),
        config.iters,
        config.burn_in,
        config.thin,
        config.seed,
        config.chains,
        config.demean,
        config.standardize,
        panel.dim(),
        panel.len()
    );

    let chain_dirs: Vec<PathBuf> = if config.chains == 1 {
        vec![config.out.clone()]
    } else {
        (0..config.chains)
            .map(|c| config.out.join(format!("chain-{c}")))
            .collect()
    };

    let started = Instant::now();
    let cap = worker_cap().max(1);
    let mut results: Vec<Option<Result<PosteriorDraws, GibbsError>>> =
        (0..config.chains).map(|_| None).collect();
    for wave in (0..config.chains as usize).collect::<Vec<_>>().chunks(cap) {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for &chain_idx in wave {
                let spec = &spec;
                let panel = &panel;
                let settings = McmcSettings {
                    iters: config.iters,
                    burn_in: config.burn_in,
                    thin: config.thin,
                    seed: config.seed + chain_idx as u64,
                };
                let progress_every = config.progress_every;
                handles.push((
                    chain_idx,
                    scope.spawn(move || {
                        run_chain_with_progress(spec, panel, &settings, |it, state| {
                            if progress_every > 0 && it % progress_every == 0 {
                                eprintln!(
                                    "chain {chain_idx} sweep {it}/{} k*={}",
                                    settings.iters,
                                    state.chain.len()
                                );
                            }
                        })
                    }),
                ));
            }
            for (chain_idx, handle) in handles {
                results[chain_idx] = Some(handle.join().expect("chain thread"));
            }
        });
    }
    let elapsed = started.elapsed().as_secs_f64();

    let mut all_k: Vec<u32> = Vec::new();
    for (chain_idx, slot) in results.into_iter().enumerate() {
        let draws = slot
            .expect("all chains scheduled")
            .map_err(|e| CommandError::Numerical(e.to_string()))?;
        all_k.extend(draws.k_star.iter());
        write_draws(&draws, &chain_dirs[chain_idx]).map_err(data)?;
        println!("chain {chain_idx}: wrote {}", chain_dirs[chain_idx].display());
    }
    let sweeps_total = config.iters * config.chains;
    println!(
        "timing: {sweeps_total} sweeps in {elapsed:.2}s ({:.0} sweeps/s)",
        sweeps_total as f64 / elapsed.max(1e-9)
    );
    if !all_k.is_empty() {
        let min = all_k.iter().min().unwrap();
        let max = all_k.iter().max().unwrap();
        let mean = all_k.iter().map(|k| *k as f64).sum::<f64>() / all_k.len() as f64;
        println!("k_star trace: min {min}, mean {mean:.2}, max {max}");
    }
    Ok(())
}

fn apply_hyper_overrides(hyper: &mut Hyperparameters, config: &RunConfig) {
    if let Some(v) = config.alpha {
        hyper.concentration = v;
    }
    if let Some(v) = config.eta {
        hyper.sparsity_shape = v;
    }
    if let Some(v) = config.dependence {
        hyper.dependence = v;
    }
    if let Some(v) = config.loc_mean {
        hyper.loc_mean = v;
    }
    if let Some(v) = config.loc_var {
        hyper.loc_var = v;
    }
    if let Some(v) = config.scale_shape {
        hyper.scale_shape = v;
    }
    if let Some(v) = config.scale_scale {
        hyper.scale_scale = v;
    }
    if let Some(v) = config.spike_shape {
        hyper.spike_shape = v;
    }
    if let Some(v) = config.spike_scale {
        hyper.spike_scale = v;
    }
    if let Some(v) = config.dof {
        hyper.dof = v;
    }
}

fn cmd_graphs(args: GraphsArgs) -> Result<(), CommandError> {
    let format = ExportFormat::parse(&args.format)
        .ok_or_else(|| usage(format!("unknown format {:?} (dot | graphml | json)", args.format)))?;
    let mode = match args.mode.as_str() {
        "binary" => {
            if !(args.threshold > 0.0 && args.threshold <= 1.0) {
                return Err(usage(format!(
                    "--threshold {} outside (0, 1]",
                    args.threshold
                )));
            }
            GraphMode::Binary {
                threshold: args.threshold,
            }
        }
        "weighted" => GraphMode::Weighted,
        other => return Err(usage(format!("unknown mode {other:?} (binary | weighted)"))),
    };
    println!(
        "effective-config: graphs draws={} format={} mode={} threshold={}",
        args.draws.display(),
        args.format,
        args.mode,
        args.threshold
    );
    let draws = read_draws(&args.draws).map_err(data)?;
    let graphs = extract_graphs(&draws, mode).map_err(data)?;
    std::fs::create_dir_all(&args.out).map_err(data)?;
    for graph in &graphs {
        let name = format!("graph_t{:04}.{}", graph.time_index, format.extension());
        std::fs::write(args.out.join(&name), export_graph(graph, format)).map_err(data)?;
    }
    println!("wrote {} graph files to {}", graphs.len(), args.out.display());
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<(), CommandError> {
    println!(
        "effective-config: diagnose draws=[{}] geweke_sweeps={} geweke_seed={}",
        args.draws
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(","),
        args.geweke_sweeps,
        args.geweke_seed
    );
    let mut chains = Vec::new();
    for dir in &args.draws {
        chains.push(read_draws(dir).map_err(data)?);
    }
    let refs: Vec<&PosteriorDraws> = chains.iter().collect();
    let table = summarize(&refs).map_err(data)?;
    std::fs::create_dir_all(&args.out).map_err(data)?;
    std::fs::write(args.out.join("summary.csv"), table.to_csv()).map_err(data)?;
    println!(
        "summary: {} parameters over {} chains -> {}",
        table.rows.len(),
        table.n_chains,
        args.out.join("summary.csv").display()
    );

    if args.geweke_sweeps > 0 {
        let meta = &chains[0].meta;
        // The validation harness wants a small configuration; shrink the
        // model dimensions but keep the variant and scalar hypers.
        let dim = meta.dim.min(3);
        let variant = SpikeVariant::parse(&meta.variant)
            .ok_or_else(|| data(format!("manifest has unknown variant {:?}", meta.variant)))?;
        let mut spec = ModelSpec::new(dim, 4, variant);
        let full_hyper = Hyperparameters::from_record(&meta.hyper, meta.dim)
            .map_err(|e| data(e.to_string()))?;
        spec.hyper = full_hyper.rescaled_for_dim(dim);
        let report = geweke_joint_test(&spec, args.geweke_sweeps, args.geweke_seed)
            .map_err(|e| CommandError::Numerical(e.to_string()))?;
        let text = format!(
            "joint-distribution validation (reduced spec: n={dim}, t_len=4, variant={})\n{}max |z| = {:.2}\n",
            variant.name(),
            report.to_table(),
            report.max_abs_z()
        );
        std::fs::write(args.out.join("geweke.txt"), &text).map_err(data)?;
        print!("{text}");
    }
    Ok(())
}
