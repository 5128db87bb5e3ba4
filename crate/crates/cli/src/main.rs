//! Command-line front end: `scan`, `optimize`, `ensemble` and
//! `analytic3` subcommands producing the CSV/JSON data files behind the
//! study's figures. Flags override config-file values; every output file
//! embeds the fully resolved configuration and master seed.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{default_delta, FileConfig, ResolvedConfig, SystemKind, SCHEMA_VERSION};

#[derive(Debug)]
pub struct CliError {
    message: String,
    usage: bool,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        CliError { message, usage: true }
    }
    pub fn runtime(message: String) -> Self {
        CliError { message, usage: false }
    }
    pub fn usage_from(e: impl std::fmt::Display) -> Self {
        Self::usage(e.to_string())
    }
    pub fn runtime_from(e: impl std::fmt::Display) -> Self {
        Self::runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "enaqt",
    version,
    about = "Steady-state transport on dephased chains: scans, noise-profile optimization, disorder ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform-dephasing flux scan with refined peak per alpha.
    Scan(CommonArgs),
    /// Site-dependent dephasing optimization with figure data files.
    Optimize(OptimizeArgs),
    /// Disorder ensembles with summary statistics (optionally over sizes).
    Ensemble(EnsembleArgs),
    /// Three-site flux landscapes and the analytic-oracle table.
    Analytic3(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON config file; explicit flags take precedence over its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for all artifacts.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, value_enum)]
    system: Option<SystemKind>,
    #[arg(long)]
    n_sites: Option<usize>,
    /// Nearest-neighbor ramp gap; defaults to 1/N (or 0.5/N with --half-bias).
    #[arg(long)]
    delta: Option<f64>,
    /// Energy of the first site of the ramp.
    #[arg(long)]
    offset: Option<f64>,
    /// Halve the total energy bias of the ramp.
    #[arg(long)]
    half_bias: bool,
    /// Comma-separated tunneling exponents, e.g. "1,3,5".
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    gamma_l: Option<f64>,
    #[arg(long)]
    j_max: Option<f64>,
    /// Master seed for disorder sampling and multi-start draws.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of multi-start draws for ramp optimization.
    #[arg(long)]
    starts: Option<usize>,
    /// Stop an optimization at its first boundary contact.
    #[arg(long)]
    strict_paper_stopping: bool,
    /// Chain JSON for --system file.
    #[arg(long)]
    chain_file: Option<String>,
    #[arg(long)]
    grid_lo: Option<f64>,
    #[arg(long)]
    grid_hi: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write per-step (eta, Gamma) trajectory CSVs.
    #[arg(long)]
    trajectory: bool,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of disorder realizations.
    #[arg(long)]
    realizations: Option<usize>,
    /// Sweep system sizes instead of a single size.
    #[arg(long)]
    n_sweep: bool,
    /// Comma-separated sizes for --n-sweep, e.g. "8,10,12,14".
    #[arg(long)]
    sweep_sizes: Option<String>,
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| CliError::usage(format!("bad {what} entry {s:?}: {e}"))))
        .collect()
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: FileConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))?;
    if let Some(v) = cfg.schema_version {
        if v != SCHEMA_VERSION {
            return Err(CliError::usage(format!(
                "config {} has schema_version {v}, expected {SCHEMA_VERSION}",
                path.display()
            )));
        }
    }
    Ok(cfg)
}

/// Merge precedence: flag > config file > built-in default.
fn resolve(
    command: &str,
    args: &CommonArgs,
    trajectory: bool,
    realizations: Option<usize>,
    n_sweep: bool,
    sweep_sizes: Option<&str>,
) -> Result<ResolvedConfig, CliError> {
    let file = load_file_config(&args.config)?;
    let system = args.system.or(file.system).unwrap_or(SystemKind::Ramp);
    let n_sites = args.n_sites.or(file.n_sites).unwrap_or(12);
    let half_bias = args.half_bias || file.half_bias.unwrap_or(false);
    let delta = args.delta.or(file.delta).unwrap_or_else(|| default_delta(n_sites, half_bias));
    let alphas = match (&args.alpha, &file.alphas) {
        (Some(list), _) => parse_list::<f64>(list, "alpha")?,
        (None, Some(list)) => list.clone(),
        (None, None) => vec![1.0, 3.0, 5.0],
    };
    let sweep_sizes = match (sweep_sizes, &file.sweep_sizes) {
        (Some(list), _) => parse_list::<usize>(list, "sweep size")?,
        (None, Some(list)) => list.clone(),
        (None, None) => vec![8, 10, 12, 14],
    };
    let mut optimizer = file.optimizer.clone().unwrap_or_default();
    // Ensembles follow the strict stopping protocol unless the config
    // file opts out; elsewhere the flag opts in.
    let strict_default = command == "ensemble";
    let strict = args.strict_paper_stopping
        || file.strict_paper_stopping.unwrap_or(strict_default && file.optimizer.is_none());
    optimizer.strict_boundary_stop = optimizer.strict_boundary_stop || strict;
    optimizer.record_trajectory =
        optimizer.record_trajectory || trajectory || file.trajectory.unwrap_or(false);

    let resolved = ResolvedConfig {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        system,
        n_sites,
        delta,
        offset: args.offset.or(file.offset).unwrap_or(0.0),
        half_bias,
        alphas,
        gamma_l: args.gamma_l.or(file.gamma_l).unwrap_or(0.1),
        j_max: args.j_max.or(file.j_max).unwrap_or(0.1),
        seed: args.seed.or(file.seed).unwrap_or(1),
        starts: args.starts.or(file.starts).unwrap_or(100),
        strict_paper_stopping: optimizer.strict_boundary_stop,
        chain_file: args.chain_file.clone().or(file.chain_file),
        grid_lo: args.grid_lo.or(file.grid_lo).unwrap_or(1e-4),
        grid_hi: args.grid_hi.or(file.grid_hi).unwrap_or(10.0),
        grid_points: args.grid_points.or(file.grid_points).unwrap_or(51),
        realizations: realizations.or(file.realizations).unwrap_or(500),
        n_sweep: n_sweep || file.n_sweep.unwrap_or(false),
        sweep_sizes,
        trajectory: optimizer.record_trajectory,
        optimizer,
    };
    resolved.validate().map_err(CliError::usage)?;
    Ok(resolved)
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let written = match &cli.command {
        Command::Scan(args) => {
            let cfg = resolve("scan", args, false, None, false, None)?;
            commands::cmd_scan(&cfg, &args.out_dir)?
        }
        Command::Optimize(args) => {
            let cfg = resolve("optimize", &args.common, args.trajectory, None, false, None)?;
            commands::cmd_optimize(&cfg, &args.common.out_dir)?
        }
        Command::Ensemble(args) => {
            let cfg = resolve(
                "ensemble",
                &args.common,
                false,
                args.realizations,
                args.n_sweep,
                args.sweep_sizes.as_deref(),
            )?;
            commands::cmd_ensemble(&cfg, &args.common.out_dir)?
        }
        Command::Analytic3(args) => {
            let cfg = resolve("analytic3", args, false, None, false, None)?;
            commands::cmd_analytic3(&cfg, &args.out_dir)?
        }
    };
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = if e.usage { "usage" } else { "runtime" };
            eprintln!("{}", serde_json::json!({ "error": e.message, "kind": kind }));
            ExitCode::from(if e.usage { 2 } else { 1 })
        }
    }
}
