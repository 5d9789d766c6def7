//! Command-line front end: scenario-driven open-quantum-system analyses.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use openq_cli::run::{run_scenario, RunOptions};
use openq_cli::scenario::{self, Scenario};

#[derive(Parser)]
#[command(
    name = "openq",
    about = "Desk-scale open-quantum-system dynamics: divisibility, projection and coherence analyses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for CSV artifacts and the JSON report.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Override the divisibility residual tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Override the scenario grid step.
    #[arg(long, global = true)]
    grid_dt: Option<f64>,

    /// Override the scenario grid end time.
    #[arg(long, global = true)]
    grid_tmax: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { scenario_file: PathBuf },
    /// Run a built-in scenario (dephasing, jsquared, counterexample).
    Preset { name: String },
    /// Parse and validate a scenario file without running it.
    Validate { scenario_file: PathBuf },
}

fn load(path: &PathBuf) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    Scenario::parse(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        out_dir: cli.out_dir,
        tolerance: cli.tolerance,
        grid_dt: cli.grid_dt,
        grid_tmax: cli.grid_tmax,
    };
    let outcome = match &cli.command {
        Command::Run { scenario_file } => load(scenario_file).and_then(|s| run_scenario(&s, &opts)),
        Command::Preset { name } => scenario::preset(name).and_then(|s| run_scenario(&s, &opts)),
        Command::Validate { scenario_file } => {
            return match load(scenario_file) {
                Ok(_) => {
                    println!("ok: scenario is valid");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("invalid scenario: {e:#}");
                    ExitCode::FAILURE
                }
            };
        }
    };
    match outcome {
        Ok(out) => {
            println!(
                "report written to {}",
                opts.out_dir.join("report.json").display()
            );
            if out.failed {
                eprintln!("one or more analyses reported errors");
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
