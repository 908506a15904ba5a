//! `blochsig`: build bases, convert states, evolve, and audit evolution laws for signaling.

mod audit;
mod basis;
mod config;
mod convert;
mod demo;
mod error;
mod evolve;
mod matrix;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Format;
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "blochsig",
    version,
    about = "No-signaling audits for nonlinear quantum evolution in Bloch coordinates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the SU(N) generators and structure constants as JSON.
    Basis {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a state between density-matrix and Bloch-coordinate JSON.
    Convert {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the joint equations of motion and write trajectory samples.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Compare every sample with the exact unitary evolution.
        #[arg(long)]
        check_oracle: bool,
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Audit the no-signaling conditions. Exit 0 on pass, 1 on signaling, ≥ 2 on error.
    Audit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Overrides `audit.seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Audit a nonlinear ξ law with interaction next to the pole-sink control.
    Demo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Basis { dim, out } => basis::run(dim, out.as_deref()).map(|_| ExitCode::SUCCESS),
        Command::Convert { input, out } => convert::run(&input, out.as_deref()).map(|_| ExitCode::SUCCESS),
        Command::Evolve {
            config,
            out,
            format,
            check_oracle,
            no_timestamp,
        } => evolve::run(&config, out.as_deref(), format, check_oracle, no_timestamp).map(|_| ExitCode::SUCCESS),
        Command::Audit {
            config,
            out,
            format,
            seed,
            no_timestamp,
        } => audit::run(&config, out.as_deref(), format, seed, no_timestamp).map(|v| match v {
            blochsig::Verdict::Pass => ExitCode::SUCCESS,
            blochsig::Verdict::SignalingDetected => ExitCode::from(1),
        }),
        Command::Demo { seed, json } => {
            demo::run(seed, json).map(|ok| if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let err = CliError::Usage(first.to_string());
            eprintln!("{err}");
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}
