use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "fraclrd",
    version,
    about = "Moments, correlation decay and LRD/SRD classification for fractional Poisson and negative binomial processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact mean and variance at each time.
    Moments(RunArgs),
    /// Correlation curve Corr[X(s), X(t)] over a time grid.
    Corr(RunArgs),
    /// Fit the power-law decay exponent of a correlation curve and label it.
    Classify(ClassifyArgs),
    /// Block-variance ratio table for the fractional Poisson process.
    Delta(DeltaArgs),
    /// Dump simulated sample paths.
    Simulate(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Process {
    Fpp,
    Fpn,
    Fnbp,
    Fnbn,
    Poisson,
    Gamma,
    InvStable,
    Nb,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Process::Fpp => "fpp",
            Process::Fpn => "fpn",
            Process::Fnbp => "fnbp",
            Process::Fnbn => "fnbn",
            Process::Poisson => "poisson",
            Process::Gamma => "gamma",
            Process::InvStable => "inv-stable",
            Process::Nb => "nb",
        }
    }

    pub fn uses_beta(self) -> bool {
        matches!(self, Process::Fpp | Process::Fpn | Process::Fnbp | Process::Fnbn | Process::InvStable)
    }

    pub fn uses_lambda(self) -> bool {
        !matches!(self, Process::Gamma | Process::InvStable)
    }

    pub fn uses_gamma(self) -> bool {
        matches!(self, Process::Fnbp | Process::Fnbn | Process::Gamma | Process::Nb)
    }

    pub fn is_noise(self) -> bool {
        matches!(self, Process::Fpn | Process::Fnbn)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytic,
    Asymptotic,
    Empirical,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Asymptotic => "asymptotic",
            Mode::Empirical => "empirical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub process: Option<Process>,
    /// Fractional index, 0 < beta <= 1.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Gamma subordinator rate.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Gamma subordinator shape per unit time.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Increment width for the noise processes.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Reference time of the correlation.
    #[arg(long)]
    pub s: Option<f64>,
    /// Times: `geom:<start>:<stop>:<count>`, `lin:<start>:<stop>:<count>` or `t1,t2,...`.
    #[arg(long = "t", visible_alias = "t-grid", allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    pub mode: Mode,
    /// Worker threads for simulation (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Step of the discretized stable subordinator (default: ~1e4 steps to the last time).
    #[arg(long)]
    pub stable_step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Read the curve from a CSV/JSON file written by `corr` (`-` for stdin).
    #[arg(long)]
    pub curve: Option<String>,
    /// Smallest t used in the fit (default 100·max(s, delta)).
    #[arg(long)]
    pub t_min: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Block index n >= 1.
    #[arg(long, default_value_t = 2)]
    pub n: u64,
    /// Block lengths, comma separated.
    #[arg(long)]
    pub m: String,
    /// Add Monte Carlo estimates with bootstrap standard errors.
    #[arg(long)]
    pub empirical: bool,
}
