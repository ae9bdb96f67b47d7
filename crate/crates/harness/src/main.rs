use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cmwu_harness::battery::{BatterySettings, DEFAULT_SEED};
use cmwu_harness::commands::{cmd_rates, cmd_run, cmd_verify, CommandOutcome};
use cmwu_harness::config::{
    normalize_formats, normalize_horizons, validate_overrides, DynamicsChoice, Format, GameSource,
    RatesConfig, RunConfig,
};

/// Clairvoyant multiplicative-weights dynamics for normal-form games.
#[derive(Parser)]
#[command(name = "cmwu", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one dynamics over one or more horizons and export artifacts.
    Run(RunArgs),
    /// Compare convergence rates of the block protocol and the explicit baseline.
    Rates(RatesArgs),
    /// Run the seeded property battery.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Game source: named:NAME, random:n=N,m=M, zero-sum-2p:m=M, or a game file path.
    #[arg(long)]
    game: String,
    /// Generator seed; required for random game sources.
    #[arg(long)]
    seed: Option<u64>,
    /// Which dynamics to run.
    #[arg(long, value_enum)]
    dynamics: DynamicsChoice,
    /// Horizon (number of rounds); repeat for several runs.
    #[arg(long = "T", required = true)]
    horizons: Vec<usize>,
    /// Common step size; defaults to 1/(2nV) (mwu: the horizon-tuned step).
    #[arg(long)]
    eta: Option<f64>,
    /// Block length; defaults to ceil(log2 T). Block protocol only.
    #[arg(long)]
    k: Option<usize>,
    /// Fixed-point residual tolerance. exact-cmwu only.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Artifact format; repeat for several.
    #[arg(long, value_enum)]
    format: Vec<Format>,
    /// Exit 0 even when the fixed-point solver fails to converge.
    #[arg(long)]
    allow_nonconverged: bool,
    /// Attempt fixed-point solves even when the map is not a contraction.
    #[arg(long)]
    lenient_contraction: bool,
}

#[derive(Args)]
struct RatesArgs {
    /// Game source: named:NAME, random:n=N,m=M, zero-sum-2p:m=M, or a game file path.
    #[arg(long)]
    game: String,
    /// Generator seed; required for random game sources.
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon; repeat at least three times with increasing values.
    #[arg(long = "T", required = true)]
    horizons: Vec<usize>,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Artifact format; repeat for several.
    #[arg(long, value_enum)]
    format: Vec<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Battery seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Replace every drawn or default step size with this one.
    #[arg(long)]
    eta: Option<f64>,
    /// Fixed-point residual tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Attempt fixed-point solves even when the map is not a contraction.
    #[arg(long)]
    lenient_contraction: bool,
}

fn dispatch(cli: Cli) -> anyhow::Result<CommandOutcome> {
    match cli.command {
        Command::Run(args) => {
            validate_overrides(args.eta, args.tolerance)?;
            let config = RunConfig {
                source: GameSource::parse(&args.game)?,
                seed: args.seed,
                dynamics: args.dynamics,
                horizons: normalize_horizons(args.horizons, 1, 1)?,
                eta: args.eta,
                block_length: args.k,
                tolerance: args.tolerance,
                out_dir: args.out,
                formats: normalize_formats(args.format),
                allow_nonconverged: args.allow_nonconverged,
                lenient_contraction: args.lenient_contraction,
            };
            cmd_run(&config)
        }
        Command::Rates(args) => {
            let config = RatesConfig {
                source: GameSource::parse(&args.game)?,
                seed: args.seed,
                horizons: normalize_horizons(args.horizons, 3, 2)?,
                out_dir: args.out,
                formats: normalize_formats(args.format),
            };
            cmd_rates(&config)
        }
        Command::Verify(args) => {
            validate_overrides(args.eta, args.tolerance)?;
            let settings = BatterySettings {
                seed: args.seed,
                eta_override: args.eta,
                tolerance: args.tolerance.unwrap_or(BatterySettings::default().tolerance),
                lenient: args.lenient_contraction,
            };
            cmd_verify(&settings)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(CommandOutcome::Clean) => ExitCode::SUCCESS,
        Ok(CommandOutcome::Failed(diagnostics)) => {
            for line in diagnostics {
                eprintln!("error: {line}");
            }
            ExitCode::from(1)
        }
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}
