//! The `qubit-ot` command line.
//!
//! Exit status is 0 on success, 1 when Monte Carlo results disagree with the
//! analytic prediction (or a channel run is rejected), and 2 for usage and
//! validation errors.

mod commands;
pub mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Tolerance, in binomial standard deviations, for Monte Carlo agreement.
pub const SIGMA_LIMIT: f64 = 4.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot encode output: {0}")]
    Encode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "qubit-ot", version, about = "p-Rabin qubit oblivious transfer over probabilistic teleportation")]
pub struct Cli {
    /// Master seed; every run is a pure function of it.
    #[arg(long, global = true, env = "QOT_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Output format [default: csv for sweep, json otherwise].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the primary output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Honest teleportation: outcome tree, or a transcript for a single trial.
    Teleport(TeleportArgs),
    /// Qubit or bit oblivious transfer statistics.
    Ot(OtArgs),
    /// Sender-side cheating strategies.
    #[command(subcommand)]
    Attack(AttackCommand),
    /// Decoy-checked sharing of the entangled pairs.
    Channel(ChannelArgs),
    /// Success probability over a grid of b^2 values.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Squared weaker channel coefficient, in (0, 0.5).
    #[arg(long, default_value_t = 0.2)]
    pub b2: f64,

    /// Input qubit: 0, 1, plus, minus, "alpha,beta" or "re_a,im_a,re_b,im_b".
    #[arg(long, default_value = "plus", allow_hyphen_values = true)]
    pub state: String,
}

#[derive(Debug, Args)]
pub struct TeleportArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OtMode {
    Qubit,
    Bit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EncodingName {
    PlusMinus,
    Computational,
}

#[derive(Debug, Args)]
pub struct OtArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, value_enum, default_value = "qubit")]
    pub mode: OtMode,

    /// Bit encoding (bit mode).
    #[arg(long, value_enum, default_value = "plus-minus")]
    pub encoding: EncodingName,

    /// Bit to transfer (bit mode).
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub bit: u8,

    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    /// Largest repetition count in the repeated-transfer curve.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub repetitions: u32,
}

#[derive(Debug, Subcommand)]
pub enum AttackCommand {
    /// Announce a Bell outcome other than the one obtained.
    FakeBm(FakeBmArgs),
    /// Apply U = k1 I + k2 X + k3 Z + k4 iY to the sender's half of the pair.
    Pauli(PauliArgs),
    /// Entangle the sender's half with a private qubit and measure it later.
    Entangle(EntangleArgs),
}

#[derive(Debug, Args)]
pub struct FakeBmArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Bell outcome actually obtained (1-4).
    #[arg(long = "true", value_parser = clap::value_parser!(u8).range(1..=4))]
    pub true_outcome: u8,

    /// Bell outcome announced (1-4).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub reported: u8,
}

#[derive(Debug, Args)]
pub struct PauliArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// k1,k2,k3,k4 as reals, or eight numbers as re,im pairs.
    #[arg(long, allow_hyphen_values = true)]
    pub k: String,
}

#[derive(Debug, Args)]
pub struct EntangleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EavesdropperName {
    None,
    InterceptResend,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    #[arg(long, default_value_t = 0.2)]
    pub b2: f64,

    /// Pairs kept.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,

    /// Pairs sacrificed to the eta test.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,

    /// Decoy qubits.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,

    #[arg(long, value_enum, default_value = "none")]
    pub eavesdropper: EavesdropperName,

    /// Independent sharing attempts; more than one reports rejection statistics.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated b^2 values.
    #[arg(long, default_value = "0.1,0.2,0.3,0.4")]
    pub grid: String,

    #[arg(long, default_value = "plus", allow_hyphen_values = true)]
    pub state: String,

    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
}

/// Primary output of a command and whether its checks passed.
pub struct Report {
    pub body: String,
    pub ok: bool,
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let format = cli.format.unwrap_or(match cli.command {
        Command::Sweep(_) => Format::Csv,
        _ => Format::Json,
    });
    match &cli.command {
        Command::Teleport(a) => commands::teleport(a, cli.seed, format),
        Command::Ot(a) => commands::ot(a, cli.seed, format),
        Command::Attack(a) => commands::attack(a, format),
        Command::Channel(a) => commands::channel(a, cli.seed, format),
        Command::Sweep(a) => commands::sweep(a, cli.seed, format),
    }
}

fn emit(cli: &Cli, body: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|r| emit(&cli, &r.body).map(|()| r.ok));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
