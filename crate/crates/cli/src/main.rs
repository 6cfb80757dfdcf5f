//! `pctsim`: run contact-tracing scenarios and the full scorecard suite.
//!
//! Exit codes: `0` success; `1` a simulation failed or the scorecard
//! differs from the expected matrices; `2` bad input (unparseable or
//! invalid scenario, missing file, corrupted matrix file, unknown names).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Output formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Machine-readable CSV files.
    Csv,
    /// Aligned text tables.
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "pctsim",
    version,
    about = "Deterministic simulator for proximity-based contact tracing designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by both commands.
#[derive(Debug, clap::Args)]
pub struct Common {
    /// Override the seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "PCTSIM_OUT_DIR", default_value = "pctsim-out")]
    pub out: PathBuf,
    /// Report formats (comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv, Format::Table])]
    pub format: Vec<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write its ledger, leakage and attack reports.
    Run {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's protocol.
        #[arg(long)]
        protocol: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the privacy, resiliency and cost suite for every design and diff
    /// the scorecard against the expected matrices.
    Scorecard {
        /// Suite file (seed, designs, cost point); built-in suite if absent.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Expected-matrix file; the shipped matrices if absent.
        #[arg(long)]
        expected: Option<PathBuf>,
        /// Restrict the run and the diff to these designs (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Parallel workers (default: available cores).
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            scenario,
            protocol,
            common,
        } => commands::run_command(&scenario, protocol.as_deref(), &common),
        Command::Scorecard {
            scenario,
            expected,
            only,
            workers,
            common,
        } => commands::scorecard_command(
            scenario.as_deref(),
            expected.as_deref(),
            &only,
            workers,
            &common,
        ),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pctsim: {e}");
            e.exit_code()
        }
    }
}
