use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use daisim_cli::runner::{run_scenario, RunOptions, EXIT_ENGINE, EXIT_PARSE};
use daisim_cli::ScenarioConfig;
use daisim_engine::check_accounting;
use daisim_engine::snapshot::{load, snapshot_pretty};

#[derive(Parser)]
#[command(name = "daisim")]
#[command(about = "Deterministic DAI protocol simulator: run scenario scripts, audit snapshots")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Run a scenario script
    Run {
        /// Path to the scenario file
        file: PathBuf,

        /// TOML configuration overriding the built-in defaults
        #[arg(long)]
        config: Option<PathBuf>,

        /// Write the final world snapshot here
        #[arg(long)]
        snapshot: Option<PathBuf>,

        /// Write the JSON trace here
        #[arg(long)]
        trace: Option<PathBuf>,

        /// Keep executing after a failure instead of stopping
        #[arg(long)]
        keep_going: bool,
    },
    /// Run the accounting checker against a snapshot file
    Check {
        /// Path to a snapshot produced by `run --snapshot`
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ENGINE as u8)
        }
    }
}

fn dispatch() -> Result<u8> {
    match Cli::parse().command {
        Commands::Run {
            file,
            config,
            snapshot,
            trace,
            keep_going,
        } => {
            let text = fs::read_to_string(&file)
                .with_context(|| format!("reading scenario {}", file.display()))?;
            let base_config = match config {
                Some(path) => {
                    let raw = fs::read_to_string(&path)
                        .with_context(|| format!("reading config {}", path.display()))?;
                    ScenarioConfig::from_toml(&raw)
                        .with_context(|| format!("parsing config {}", path.display()))?
                }
                None => ScenarioConfig::default(),
            };
            let options = RunOptions {
                keep_going,
                config: base_config,
            };
            let outcome = match run_scenario(&text, &options) {
                Ok(outcome) => outcome,
                Err(parse_error) => {
                    eprintln!("{parse_error}");
                    return Ok(EXIT_PARSE as u8);
                }
            };
            for entry in &outcome.trace {
                match &entry.info {
                    Some(info) => println!(
                        "line {:>3}  {:<16} {}  ({info})",
                        entry.line, entry.verb, entry.status
                    ),
                    None => println!("line {:>3}  {:<16} {}", entry.line, entry.verb, entry.status),
                }
            }
            if let Some(path) = trace {
                fs::write(&path, outcome.trace_json())
                    .with_context(|| format!("writing trace {}", path.display()))?;
            }
            if let Some(path) = snapshot {
                match &outcome.world {
                    Some(world) => fs::write(&path, snapshot_pretty(world))
                        .with_context(|| format!("writing snapshot {}", path.display()))?,
                    None => eprintln!("no world to snapshot; script never ran init"),
                }
            }
            Ok(outcome.exit_code as u8)
        }
        Commands::Check { file } => {
            let text = fs::read_to_string(&file)
                .with_context(|| format!("reading snapshot {}", file.display()))?;
            let world = match load(&text) {
                Ok(world) => world,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(EXIT_PARSE as u8);
                }
            };
            let report = check_accounting(&world);
            print!("{report}");
            if report.healthy() && report.lints.is_empty() {
                println!();
            }
            Ok(if report.healthy() { 0 } else { EXIT_ENGINE as u8 })
        }
    }
}
