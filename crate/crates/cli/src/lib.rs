//! Command-line front end for `anonlip`.
//!
//! Every command is implemented as a function returning its rendered output,
//! so the binary is a thin wrapper and tests can call commands in-process.

pub mod commands;
pub mod fmt;
pub mod game_file;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{run, CliError};

#[derive(Debug, Parser)]
#[command(name = "anonlip", version, about = "Lipschitz constants of perturbed anonymous games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate λ(n, k, δ).
    Lambda(LambdaArgs),
    /// Tabulate λ over a range of n and a list of δ.
    Sweep(SweepArgs),
    /// Monte Carlo estimate of the coupling non-meeting probability.
    Coupling(CouplingArgs),
    /// Histogram of the coupling meeting time and gap-process transitions.
    MeetTime(CouplingArgs),
    /// Search a game for a pure ε-Nash profile of its δ-perturbation.
    Equilibrium(EquilibriumArgs),
    /// Solve λ(n, k, δ) = δ.
    DeltaStar(DeltaStarArgs),
    /// Compare the closed forms against the brute-force oracle.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Formula,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct OracleLimits {
    /// Largest n the oracle will attempt.
    #[arg(long, default_value_t = 14)]
    pub oracle_max_n: usize,
    /// Largest k the oracle will attempt.
    #[arg(long, default_value_t = 4)]
    pub oracle_max_k: usize,
}

#[derive(Debug, Args)]
pub struct LambdaArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = Method::Formula)]
    pub method: Method,
    #[command(flatten)]
    pub limits: OracleLimits,
    /// Emit a JSON object instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Inclusive range `start,stop,step`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_range: Vec<usize>,
    #[arg(long)]
    pub k: usize,
    /// Comma-separated δ values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub deltas: Vec<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SweepFormat::Csv)]
    pub format: SweepFormat,
}

#[derive(Debug, Args)]
pub struct CouplingArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated 0-based actions of the n perturbed players.
    #[arg(long, value_delimiter = ',')]
    pub baseline: Option<Vec<usize>>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct GameSource {
    /// Game file (JSON).
    #[arg(long, group = "source")]
    pub game: Option<PathBuf>,
    /// Built-in party game with this many players (`4` or `n=4`).
    #[arg(long, group = "source", value_parser = parse_party)]
    pub party: Option<usize>,
    /// Random game with this many players; see --actions and --seed.
    #[arg(long, group = "source")]
    pub random: Option<usize>,
}

fn parse_party(s: &str) -> Result<usize, String> {
    s.strip_prefix("n=").unwrap_or(s).parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[command(flatten)]
    pub source: GameSource,
    /// Party preferences, comma-separated `even`/`odd`; alternates by default.
    #[arg(long, value_delimiter = ',')]
    pub preferences: Option<Vec<String>>,
    /// Actions of the random game.
    #[arg(long, default_value_t = 2)]
    pub actions: usize,
    /// Seed of the random game.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Perturbation; 0 evaluates the unperturbed game.
    #[arg(long)]
    pub delta: f64,
    /// Regret threshold, or `auto` for 2kλ(n, k, δ).
    #[arg(long, default_value = "auto")]
    pub eps: String,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_profiles: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DeltaStarArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest n checked for k = 3, 4.
    #[arg(long, default_value_t = 8)]
    pub max_n_k3: usize,
    /// Largest n checked for k = 2.
    #[arg(long, default_value_t = 12)]
    pub max_n_k2: usize,
    /// Allowed |formula − oracle|.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub limits: OracleLimits,
    #[arg(long)]
    pub json: bool,
}
