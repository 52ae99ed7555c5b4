use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seed used when neither `--seed` nor `WPL_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Parser)]
#[command(name = "wpl", version, about = "Polar secrecy codes over binary erasure wiretap channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a secrecy partition and write it as JSON (1-based index sets).
    Construct(Opts),
    /// Leakage bounds over a grid of wiretap erasure probabilities.
    Bounds(Opts),
    /// Leakage bounds plus a Monte Carlo leakage estimate per grid point.
    McLeakage(Opts),
    /// Leakage bounds plus the exact leakage by pattern enumeration (n <= 16).
    ExactLeakage(Opts),
    /// Simulate the legitimate receiver's SC decoding over the main channel.
    Simulate(Opts),
    /// Finite-length scaling sweep of the good-set construction.
    Scaling(Opts),
    /// Scaling sweep of the construction operating above secrecy capacity.
    AboveCapacity(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Construct(_) => "construct",
            Command::Bounds(_) => "bounds",
            Command::McLeakage(_) => "mc-leakage",
            Command::ExactLeakage(_) => "exact-leakage",
            Command::Simulate(_) => "simulate",
            Command::Scaling(_) => "scaling",
            Command::AboveCapacity(_) => "above-capacity",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Construct(o)
            | Command::Bounds(o)
            | Command::McLeakage(o)
            | Command::ExactLeakage(o)
            | Command::Simulate(o)
            | Command::Scaling(o)
            | Command::AboveCapacity(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Block length exponent, n = 2^m.
    #[arg(long)]
    pub m: Option<u32>,

    /// Comma-separated block length exponents for sweeps.
    #[arg(long, value_delimiter = ',')]
    pub m_list: Vec<u32>,

    /// Main channel erasure probability.
    #[arg(long)]
    pub main_eps: Option<f64>,

    /// Wiretap channel erasure probability.
    #[arg(long, conflicts_with = "wiretap_eps_grid")]
    pub wiretap_eps: Option<f64>,

    /// Wiretap erasure grid as start:stop:step.
    #[arg(long)]
    pub wiretap_eps_grid: Option<String>,

    /// Target block error probability P_e; the good-set threshold is P_e / n.
    #[arg(long, default_value_t = 1e-3)]
    pub pe: f64,

    /// Monte Carlo trials.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,

    /// Random seed; falls back to WPL_SEED, then to a fixed default.
    #[arg(long, env = "WPL_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Operate above secrecy capacity by moving ceil(n^(1-1/delta)) random
    /// indices into the message set.
    #[arg(long)]
    pub delta: Option<f64>,

    /// Fixed-size construction: number of message bits.
    #[arg(long, requires = "r")]
    pub k: Option<usize>,

    /// Fixed-size construction: number of random bits.
    #[arg(long, requires = "k")]
    pub r: Option<usize>,

    /// Use a partition previously written by `construct`.
    #[arg(long)]
    pub partition: Option<PathBuf>,

    /// Cap on worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,

    /// Output file.
    #[arg(long)]
    pub out: PathBuf,

    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
