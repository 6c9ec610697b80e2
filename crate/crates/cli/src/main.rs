//! `plap`: classify parameter tuples, run the solver, execute verification
//! suites and parameter sweeps from a JSON config.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] plap_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use plap_core::Error as E;
        match self {
            CliError::Config(_) => 3,
            CliError::Core(E::InvalidParams(_) | E::InvalidDomain(_) | E::InvalidArgument(_) | E::Precondition(_)) => 3,
            CliError::Core(_) | CliError::Io(_) => 4,
        }
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_BLOWUP: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "plap", version, about = "p-Laplacian evolution solver and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Seed for randomized suites; overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report the predicted regime with every hypothesis margin.
    Classify,
    /// Integrate from the configured initial data.
    Solve,
    /// Run one verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Cartesian sweep over the configured parameter axes.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemma,
    Profile,
    Subsolution,
    Supersolution,
    Comparison,
}

pub struct Globals {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let globals = Globals { config: cli.config, out: cli.out, jobs: cli.jobs, seed: cli.seed };
    let result = match cli.command {
        Command::Classify => commands::classify(&globals),
        Command::Solve => commands::solve(&globals),
        Command::Verify { suite } => commands::verify(&globals, suite),
        Command::Sweep => commands::sweep(&globals),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
