//! `ces-ge`: estimate CES elasticities from linked input-output tables and
//! simulate productivity shocks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "ces-ge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate per-sector elasticities and TFP growth from two periods.
    Estimate(EstimateArgs),
    /// Solve projected prices and social cost saved under a productivity shock.
    Shock(ShockArgs),
    /// Check the sign law of SCS over a uniform gamma grid and search for counterexamples.
    Proposition(PropositionArgs),
    /// Write a synthetic two-period bundle with known truth.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a JSON twin of every CSV.
    #[arg(long)]
    pub json: bool,
    /// Run the per-sector and Monte Carlo loops on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub period0: PathBuf,
    #[arg(long)]
    pub period1: PathBuf,
    /// Defaults to the `deflators` entry of the period manifests.
    #[arg(long)]
    pub deflators: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// 0 disables the bootstrap.
    #[arg(long, default_value_t = 400)]
    pub bootstrap_reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Recompute a0 as one minus the column sums of A.
    #[arg(long)]
    pub renormalize: bool,
    /// Drop each sector's own-input share from its regression.
    #[arg(long)]
    pub exclude_diagonal: bool,
    /// HC1 heteroskedasticity-robust standard errors.
    #[arg(long)]
    pub robust_errors: bool,
    /// Resample residuals instead of (x, y) pairs.
    #[arg(long)]
    pub residual_bootstrap: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Leontief,
    CobbDouglas,
    Ces,
    CesAll,
    CesPaperClosedForm,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Leontief => "leontief",
            Method::CobbDouglas => "cobb-douglas",
            Method::Ces => "ces",
            Method::CesAll => "ces-all",
            Method::CesPaperClosedForm => "ces-paper-closed-form",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributionArg {
    Producing,
    FinalDemand,
}

#[derive(Args, Debug)]
pub struct ShockArgs {
    #[arg(long)]
    pub economy: PathBuf,
    /// estimates.csv from `ces-ge estimate`; needed by the ces methods.
    #[arg(long)]
    pub estimates: Option<PathBuf>,
    /// Repeatable or comma separated; one summary row per method.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ces")]
    pub method: Vec<Method>,
    /// `sector=<id or label>,factor=<multiplier>`; repeatable.
    #[arg(long, required = true)]
    pub shock: Vec<String>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value = "producing")]
    pub attribution: AttributionArg,
    #[arg(long)]
    pub renormalize: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionArg {
    Up,
    Down,
}

#[derive(Args, Debug)]
pub struct PropositionArgs {
    #[arg(long)]
    pub economy: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub gamma_grid: Vec<f64>,
    #[arg(long, value_enum, default_value = "up")]
    pub direction: DirectionArg,
    /// Explicit shock; by default every sector gets a seeded factor in
    /// [1, 2] (or its reciprocal for `down`).
    #[arg(long)]
    pub shock: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Heterogeneous-gamma trials of the counterexample search.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 2.0)]
    pub sigma_max: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value = "producing")]
    pub attribution: AttributionArg,
    #[arg(long)]
    pub renormalize: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standard deviation of the log-share noise in the second period.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.2)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = 0.8)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 0.8)]
    pub z_min: f64,
    #[arg(long, default_value_t = 1.25)]
    pub z_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub density: f64,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match &cli.command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Shock(a) => commands::shock(a),
        Command::Proposition(a) => commands::proposition(a),
        Command::Synth(a) => commands::synth(a),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("ces-ge: {error:#}");
            ExitCode::from(code)
        }
    }
}
