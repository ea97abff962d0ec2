//! `retropast` — compute optimal backwards-in-time channel simulation
//! probabilities, sweep curves, run invariant batteries, and Monte Carlo
//! simulate the optimal teleportation protocols.
//!
//! Exit codes: 0 success, 2 usage error, 3 numeric/verification failure.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

mod commands;
mod jsonfmt;
mod specfile;

/// Failure modes mapped onto the stable exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Invalid invocation or input file: exit code 2.
    Usage(String),
    /// Solver, verification, or realization failure: exit code 3.
    Numeric(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "retropast",
    version,
    about = "Optimal probabilistic simulation of quantum channels from the future to the past"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the maximum simulation probability and its certificate.
    Prob(ProbArgs),
    /// Sweep the N -> M partial-trace curve and emit CSV.
    Curve(CurveArgs),
    /// Run the named invariant batteries and emit a JSON summary.
    Verify(VerifyArgs),
    /// Realize the optimal protocol and run a Monte Carlo simulation.
    Simulate(SimulateArgs),
}

/// Channel selection shared by `prob` and `simulate`.
#[derive(Args, Clone)]
struct ChannelArgs {
    /// Channel family: identity | classical | erasure | estimation | unot |
    /// trace | cloning.
    #[arg(long)]
    family: Option<String>,

    /// One-particle dimension d (>= 2).
    #[arg(long)]
    d: Option<usize>,

    /// Number of input copies N (trace/cloning families).
    #[arg(long = "N")]
    copies_in: Option<usize>,

    /// Number of output copies M (trace/cloning families).
    #[arg(long = "M")]
    copies_out: Option<usize>,

    /// Explicit-matrix channel file (JSON; see docs/matrix-format.md).
    #[arg(long, conflicts_with = "family")]
    spec_file: Option<PathBuf>,
}

#[derive(Args)]
struct ProbArgs {
    #[command(flatten)]
    channel: ChannelArgs,

    /// RNG seed (default: RETRO_SEED env var, else 0).
    #[arg(long)]
    seed: Option<u64>,

    /// Write the result record to this file.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Output format: json | csv.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct CurveArgs {
    /// One-particle dimension d (>= 2).
    #[arg(long)]
    d: usize,

    /// Number of output copies M.
    #[arg(long = "M", default_value_t = 1)]
    copies_out: usize,

    /// Range of input copies, e.g. `1..20` (inclusive) or a single value.
    #[arg(long = "N")]
    copies_in: String,

    /// RNG seed (default: RETRO_SEED env var, else 0).
    #[arg(long)]
    seed: Option<u64>,

    /// Write the CSV to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run a single suite (linalg | symmetric | channels | causality |
    /// protocol | infogame | mp-gamma); default: all suites.
    #[arg(long)]
    suite: Option<String>,

    /// Fault injection: perturb selected Choi operators by this relative
    /// magnitude so the duality and feasibility checks fail.
    #[arg(long, default_value_t = 0.0)]
    perturb_choi: f64,

    /// Number of random measure-and-prepare channels in the mp-gamma suite.
    #[arg(long, default_value_t = 200)]
    mp_channels: usize,

    /// RNG seed (default: RETRO_SEED env var, else 0).
    #[arg(long)]
    seed: Option<u64>,

    /// Write the JSON summary to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    channel: ChannelArgs,

    /// Number of Monte Carlo trials (>= 1; >= 1000 recommended).
    #[arg(long, default_value_t = 100_000)]
    trials: u64,

    /// RNG seed (default: RETRO_SEED env var, else 0).
    #[arg(long)]
    seed: Option<u64>,

    /// Write the result record to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Seed resolution: explicit flag, then RETRO_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("RETRO_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Prob(args) => commands::cmd_prob(&args),
        Command::Curve(args) => commands::cmd_curve(&args),
        Command::Verify(args) => commands::cmd_verify(&args),
        Command::Simulate(args) => commands::cmd_simulate(&args),
    };
    match outcome {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.code());
        }
    }
}
