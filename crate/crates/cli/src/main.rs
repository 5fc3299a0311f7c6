//! Command-line front end: scenario files in, tables and CSV out.

mod commands;
mod format;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Output};

/// Postselected quantum Fisher information toolkit.
///
/// Scenario files are JSON; complex numbers are [re, im] pairs, matrices are
/// row-major nested arrays, parameter indices are 0-based and every angle is
/// in radians.
///
/// Exit status: 0 success, 1 pinned check failed, 2 invalid input,
/// 3 numeric failure.
#[derive(Debug, Parser)]
#[command(name = "psqfim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// QFIM, Uhlmann curvature, geometric quantumness and risk bracket at theta_true.
    Qfim(ScenarioArgs),
    /// Exact distilled QFIM against the 1/t^2 prediction.
    Distill(ScenarioArgs),
    /// Conditioned Kirkwood-Dirac distribution for kd_pair.
    Kd(ScenarioArgs),
    /// Distillation reports over a list of transmissivities, as CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated transmissivities in (0, 1], e.g. 1,0.5,0.25.
        #[arg(long = "t-list", value_name = "T,...")]
        t_list: String,
    },
    /// Built-in two-parameter qubit benchmark with pinned checks.
    PaperExample {
        /// Override theta_1 (radians).
        #[arg(long, allow_hyphen_values = true)]
        theta1: Option<f64>,
        /// Override the transmissivity.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo maximum-likelihood check against the Cramer-Rao bound.
    Crb(ScenarioArgs),
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Also write machine-readable results here.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

fn write_csv(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (output, csv_path): (Output, Option<PathBuf>) = match cli.command {
        Command::Qfim(args) => (commands::qfim(&commands::load_scenario(&args.scenario)?)?, args.csv),
        Command::Distill(args) => (commands::distill(&commands::load_scenario(&args.scenario)?)?, args.csv),
        Command::Kd(args) => (commands::kd(&commands::load_scenario(&args.scenario)?)?, args.csv),
        Command::Sweep { scenario, t_list } => {
            let t_values = commands::parse_t_list(&t_list)?;
            let loaded = commands::load_scenario(&scenario.scenario)?;
            (commands::sweep(&loaded, &t_values)?, scenario.csv)
        }
        Command::PaperExample { theta1, t, csv } => (commands::paper_example(theta1, t)?, csv),
        Command::Crb(args) => (commands::crb(&commands::load_scenario(&args.scenario)?)?, args.csv),
    };
    if let Some(path) = csv_path {
        write_csv(&path, &output.csv)?;
    }
    print!("{}", output.text);
    for warning in &output.warnings {
        eprintln!("{warning}");
    }
    Ok(output.code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
