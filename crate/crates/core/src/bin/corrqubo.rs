use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use corrqubo::annealer::{anneal_traced, write_trace_csv, AnnealSchedule};
use corrqubo::config::{parse_list, parse_usize_list, KeyValueConfig};
use corrqubo::datagen::{generate, GeneratorConfig};
use corrqubo::harness::{run_experiment, ExperimentConfig, Method};
use corrqubo::qubo::{bits_to_string, QuboProblem};
use corrqubo::sampler::{CorrelationReport, SamplerConfig};
use corrqubo::{BasisVector, RegressionDataset};

/// Correlation-based QUBO discretization toolkit.
#[derive(Parser)]
#[command(name = "corrqubo", version)]
struct Cli {
    /// `key = value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic regression dataset.
    Generate(GenerateArgs),
    /// Sample the regression cost and select correlated pairs.
    Sample(SampleArgs),
    /// Anneal a QUBO read from a text file.
    Anneal(AnnealArgs),
    /// Run the full benchmark sweep.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n_total: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SamplerArgs {
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    proposal_sigma: Option<f64>,
    /// Steps between samples (default: 2 x parameter count).
    #[arg(long)]
    interval: Option<usize>,
    #[arg(long)]
    chain_length: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct SampleArgs {
    /// Dataset CSV (feature columns then target).
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Correlation matrix CSV (stdout if omitted).
    #[arg(long)]
    corr_out: Option<PathBuf>,
    /// Selected pairs CSV (stdout if omitted).
    #[arg(long)]
    pairs_out: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct AnnealArgs {
    /// QUBO text file: `n offset` header then `i j value` lines.
    #[arg(long)]
    qubo: Option<PathBuf>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Write a decimated trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    trace_rows: Option<usize>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    n_total: Option<usize>,
    #[arg(long)]
    train_size: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Dataset seed (default: the master seed).
    #[arg(long)]
    data_seed: Option<u64>,
    /// Comma-separated basis coefficients.
    #[arg(long)]
    basis: Option<String>,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Shared-bit counts, e.g. `0..10` or `0,2,4`.
    #[arg(long)]
    cuts: Option<String>,
    /// Comma-separated subset of proposed, random, none.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Per-trial results CSV (stdout if omitted).
    #[arg(long)]
    results: Option<PathBuf>,
    /// Human-readable summary (stderr if omitted).
    #[arg(long)]
    summary: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "n-total",
    "train-size",
    "noise-sigma",
    "seed",
    "data-seed",
    "out",
    "data",
    "temperature",
    "proposal-sigma",
    "interval",
    "chain-length",
    "burn-in",
    "threshold",
    "corr-out",
    "pairs-out",
    "qubo",
    "iterations",
    "t0",
    "gamma",
    "trace",
    "trace-rows",
    "basis",
    "cuts",
    "methods",
    "trials",
    "threads",
    "results",
    "summary",
];

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => KeyValueConfig::load(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => KeyValueConfig::default(),
    };
    let unknown = file.unknown_keys(KNOWN_KEYS);
    if !unknown.is_empty() {
        bail!("unknown config keys: {}", unknown.join(", "));
    }
    match cli.command {
        Command::Generate(args) => cmd_generate(&file, args),
        Command::Sample(args) => cmd_sample(&file, args),
        Command::Anneal(args) => cmd_anneal(&file, args),
        Command::Experiment(args) => cmd_experiment(&file, args),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_generate(file: &KeyValueConfig, args: GenerateArgs) -> Result<()> {
    let defaults = GeneratorConfig::default();
    let cfg = GeneratorConfig {
        n_total: file.resolve(args.n_total, "n-total", defaults.n_total)?,
        noise_sigma: file.resolve(args.noise_sigma, "noise-sigma", defaults.noise_sigma)?,
        seed: file.resolve(args.seed, "seed", defaults.seed)?,
        ..defaults
    };
    let ds = generate(&cfg)?;
    let out = file.resolve_opt(args.out, "out")?;
    ds.write_csv(output(out.as_deref())?)?;
    Ok(())
}

fn sampler_config(
    file: &KeyValueConfig,
    args: &SamplerArgs,
    dims: usize,
    seed: u64,
) -> Result<(SamplerConfig, f64)> {
    let d = SamplerConfig::for_dims(dims, seed);
    let cfg = SamplerConfig {
        temperature: file.resolve(args.temperature, "temperature", d.temperature)?,
        proposal_sigma: file.resolve(args.proposal_sigma, "proposal-sigma", d.proposal_sigma)?,
        interval: file.resolve(args.interval, "interval", d.interval)?,
        chain_length: file.resolve(args.chain_length, "chain-length", d.chain_length)?,
        burn_in: file.resolve(args.burn_in, "burn-in", d.burn_in)?,
        seed,
    };
    let threshold = file.resolve(args.threshold, "threshold", 0.8)?;
    Ok((cfg, threshold))
}

fn schedule(file: &KeyValueConfig, args: &ScheduleArgs, seed: u64) -> Result<AnnealSchedule> {
    let d = AnnealSchedule::reference(seed);
    let iterations = file.resolve(args.iterations, "iterations", d.iterations)?;
    // without an explicit decay rate, keep the reference end temperature
    let d = d.rescaled(iterations);
    Ok(AnnealSchedule {
        iterations,
        t0: file.resolve(args.t0, "t0", d.t0)?,
        gamma: file.resolve(args.gamma, "gamma", d.gamma)?,
        seed,
    })
}

fn cmd_sample(file: &KeyValueConfig, args: SampleArgs) -> Result<()> {
    let seed = file.resolve(args.seed, "seed", 0)?;
    let ds = match file.resolve_opt(args.data, "data")? {
        Some(path) => RegressionDataset::read_csv(BufReader::new(
            File::open(&path).with_context(|| format!("opening {}", path.display()))?,
        ))?,
        None => generate(&GeneratorConfig {
            seed,
            ..GeneratorConfig::default()
        })?,
    };
    let (cfg, threshold) = sampler_config(file, &args.sampler, ds.n_params(), seed)?;
    let report = CorrelationReport::estimate(&ds, &cfg, threshold)?;
    report.write_matrix_csv(output(
        file.resolve_opt(args.corr_out, "corr-out")?.as_deref(),
    )?)?;
    report.write_pairs_csv(output(
        file.resolve_opt(args.pairs_out, "pairs-out")?.as_deref(),
    )?)?;
    Ok(())
}

fn cmd_anneal(file: &KeyValueConfig, args: AnnealArgs) -> Result<()> {
    let Some(path) = file.resolve_opt(args.qubo, "qubo")? else {
        bail!("--qubo is required");
    };
    let q = QuboProblem::read_text(BufReader::new(
        File::open(&path).with_context(|| format!("opening {}", path.display()))?,
    ))?;
    let seed = file.resolve(args.seed, "seed", 0)?;
    let sched = schedule(file, &args.schedule, seed)?;
    let rows = file.resolve(args.trace_rows, "trace-rows", 10_000)?;
    let (result, trace) = anneal_traced(&q, &sched, rows)?;
    if let Some(trace_path) = file.resolve_opt(args.trace, "trace")? {
        write_trace_csv(&trace, output(Some(&trace_path))?)?;
    }
    let mut out = io::stdout().lock();
    writeln!(out, "energy {}", result.best_energy)?;
    writeln!(out, "bits {}", bits_to_string(&result.best_z))?;
    writeln!(
        out,
        "flips {} accepted {} seconds {:.3}",
        result.flips_attempted, result.flips_accepted, result.wall_time
    )?;
    Ok(())
}

fn cmd_experiment(file: &KeyValueConfig, args: ExperimentArgs) -> Result<()> {
    let d = ExperimentConfig::default();
    let master_seed = file.resolve(args.seed, "seed", d.master_seed)?;
    let generator = GeneratorConfig {
        n_total: file.resolve(args.n_total, "n-total", d.generator.n_total)?,
        train_size: file.resolve(args.train_size, "train-size", d.generator.train_size)?,
        noise_sigma: file.resolve(args.noise_sigma, "noise-sigma", d.generator.noise_sigma)?,
        seed: file.resolve(args.data_seed, "data-seed", master_seed)?,
    };
    let basis = match file.resolve_opt(args.basis, "basis")? {
        Some(s) => BasisVector::new(parse_list(&s)?)?,
        None => d.basis.clone(),
    };
    let dims = corrqubo::datagen::TRUE_WEIGHTS.len();
    let (sampler, threshold) = sampler_config(file, &args.sampler, dims, 0)?;
    let cut_values = match file.resolve_opt(args.cuts, "cuts")? {
        Some(s) => parse_usize_list(&s)?,
        None => d.cut_values.clone(),
    };
    let methods = match file.resolve_opt(args.methods, "methods")? {
        Some(s) => parse_list::<Method>(&s)?,
        None => d.methods.clone(),
    };
    let cfg = ExperimentConfig {
        generator,
        basis,
        sampler,
        schedule: schedule(file, &args.schedule, 0)?,
        threshold,
        cut_values,
        methods,
        n_trials: file.resolve(args.trials, "trials", d.n_trials)?,
        master_seed,
        threads: file.resolve_opt(args.threads, "threads")?,
    };

    let report = run_experiment(&cfg)?;
    report.write_results_csv(output(
        file.resolve_opt(args.results, "results")?.as_deref(),
    )?)?;
    match file.resolve_opt(args.summary, "summary")? {
        Some(path) => report.write_summary(output(Some(&path))?)?,
        None => report.write_summary(io::stderr().lock())?,
    }
    Ok(())
}
