//! Scenario-script front end for the daisim engine: a line-oriented DSL, a
//! deterministic runner with per-step accounting sweeps, and TOML-or-inline
//! configuration of the initial system.

pub mod config;
pub mod parser;
pub mod runner;

pub use config::{initialize_system, ConfigError, ScenarioConfig};
pub use parser::{parse_scenario, Command, ParseError, ScenarioCommand};
pub use runner::{
    run_scenario, RunOptions, RunOutcome, TraceEntry, EXIT_ASSERTION, EXIT_ENGINE, EXIT_OK,
    EXIT_PARSE,
};
