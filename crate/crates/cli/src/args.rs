use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use monord_core::simgen::{Family, Mode};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MONORD_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "monord-out";

#[derive(Debug, Parser)]
#[command(name = "monord", version, about = "Bayesian monotone ordinal regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the reversible-jump sampler on a CSV dataset.
    Fit(FitArgs),
    /// Generate a simulation scenario with its exact truth.
    Simulate(SimulateArgs),
    /// Run the sampler without data and summarise the prior.
    PriorCheck(PriorCheckArgs),
    /// Posterior mean surfaces, standardized functions or predictions from a fit.
    Predict(PredictArgs),
    /// Error, covariate selection and trace summaries of a fit.
    Diag(DiagArgs),
    /// Fit the proportional-odds baseline.
    Baseline(BaselineArgs),
}

/// Flags shared by every sampling command; they override the config file.
#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long = "burn-in")]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory [default: $MONORD_OUT_DIR or ./monord-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl OutArgs {
    pub fn resolve(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV; overrides `[data] path` in the config.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Repeat the run described by a manifest written by an earlier fit.
    #[arg(long, conflicts_with_all = ["config", "data"])]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long)]
    pub chains: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
    /// Print progress to stderr every this many iterations.
    #[arg(long)]
    pub progress: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long, value_parser = parse_mode, default_value = "nonparametric")]
    pub mode: Mode,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Extra covariates with no effect on the response.
    #[arg(long, default_value_t = 0)]
    pub noise: usize,
    /// Points per axis of the truth grid.
    #[arg(long, default_value_t = 51)]
    pub grid: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PriorCheckArgs {
    #[arg(long, default_value_t = 2)]
    pub covariates: usize,
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long)]
    pub chains: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Output directory of a fit.
    #[arg(long)]
    pub run: PathBuf,
    /// Predict category probabilities for the rows of this CSV.
    #[arg(long, conflicts_with = "standardized")]
    pub data: Option<PathBuf>,
    /// Standardized function of this covariate (1-based).
    #[arg(long)]
    pub standardized: Option<usize>,
    /// Points per axis of the evaluation grid.
    #[arg(long, default_value_t = 21)]
    pub resolution: usize,
    /// Value of covariates beyond the first two on the surface grid.
    #[arg(long, default_value_t = 0.5)]
    pub fix: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    /// Output directory of a fit.
    #[arg(long)]
    pub run: PathBuf,
    /// Per-observation true category probabilities (`row,p1..pK`).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: monord_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: monord_core::Error| e.to_string())
}
