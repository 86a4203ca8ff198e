mod bath;
mod error;
mod fit;
mod output;
mod sweep;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

/// Coupled-mode phonon damping: sweeps, self-checks, bath convergence and
/// linewidth fitting.
#[derive(Debug, Parser)]
#[command(name = "quasimode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Linewidths, effective temperatures and shifts along a parameter sweep (CSV).
    Sweep(sweep::SweepArgs),
    /// Cross-check closed forms against matrix elimination on random parameter sets.
    Validate(validate::ValidateArgs),
    /// Fit linewidth-versus-power data (JSON report).
    Fit(fit::FitArgs),
    /// Convergence of the discretized bath sum towards the continuum (CSV).
    Bath(bath::BathArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("QUASIMODE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("QUASIMODE_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Numerical(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Sweep(args) => sweep::run(&args),
        Command::Validate(args) => validate::run(&args),
        Command::Fit(args) => fit::run(&args),
        Command::Bath(args) => bath::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Shared `--out` handling.
#[derive(Debug, Clone, clap::Args)]
pub struct OutArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
