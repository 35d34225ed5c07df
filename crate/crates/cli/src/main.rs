//! `dirstep` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a simulation reports invariant
//! violations, 2 for usage, input and parse errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "dirstep", version, about = "Directional stepwise multiple testing")]
struct Cli {
    /// Write the result to PATH instead of stdout, plus a PATH.manifest.json sidecar.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Master seed overriding the one in the scenario file.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads for simulations. Results do not depend on it.
    #[arg(long, global = true, value_name = "N", env = "DIRSTEP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a critical-value schedule as CSV.
    Critvals {
        /// holm, hochberg, proc3, bh, proc5 or bonferroni.
        kind: String,
        n: usize,
        alpha: f64,
    },
    /// Apply one procedure to statistics or p-values from a JSON file.
    Run { input: PathBuf },
    /// Run the scenarios of a JSON file and write error-rate estimates as CSV.
    Simulate { config: PathBuf },
    /// Exact FWER of the two-stage procedure at the global null and its bound.
    Oracle { n: usize, alpha: f64 },
}

/// Error classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Exit code 2.
    Usage(anyhow::Error),
    /// Exit code 1.
    Check(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = output::Context {
        out: cli.out,
        seed: cli.seed,
        threads: cli.threads,
    };
    let result = match cli.command {
        Command::Critvals { kind, n, alpha } => commands::critvals(&ctx, &kind, n, alpha),
        Command::Run { input } => commands::run(&ctx, &input),
        Command::Simulate { config } => commands::simulate(&ctx, &config),
        Command::Oracle { n, alpha } => commands::oracle(&ctx, n, alpha),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
