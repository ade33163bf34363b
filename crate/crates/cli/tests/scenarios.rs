//! End-to-end tests of the scenario DSL, the runner contract (exit codes,
//! determinism, keep-going), and the shipped example scripts.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::Command as ProcessCommand;

use daisim_cli::parser::{parse_scenario, Command};
use daisim_cli::runner::{run_scenario, RunOptions, EXIT_ASSERTION, EXIT_ENGINE};
use daisim_cli::ScenarioConfig;
use daisim_engine::amount::{amt, signed};
use daisim_engine::snapshot::{load, snapshot_pretty};

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn read_scenario(name: &str) -> String {
    let path = scenario_dir().join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn run_default(text: &str) -> daisim_cli::RunOutcome {
    run_scenario(text, &RunOptions::default()).expect("script parses")
}

#[test]
fn every_shipped_scenario_passes() {
    for entry in fs::read_dir(scenario_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("scn") {
            continue;
        }
        let text = fs::read_to_string(&path).unwrap();
        let outcome = run_default(&text);
        assert_eq!(
            outcome.exit_code,
            0,
            "{} failed:\n{}",
            path.display(),
            outcome
                .trace
                .iter()
                .map(|e| format!("line {} {} {}", e.line, e.verb, e.status))
                .collect::<Vec<_>>()
                .join("\n")
        );
    }
}

#[test]
fn crash_scenario_reaches_exact_negative_vow() {
    let outcome = run_default(&read_scenario("scenario1.scn"));
    assert_eq!(outcome.exit_code, 0);
    let world = outcome.world.unwrap();
    assert_eq!(*world.vow_balance(), signed("-113"));
}

#[test]
fn identical_runs_produce_identical_traces_and_snapshots() {
    for name in ["scenario1.scn", "scenario2.scn", "auctions.scn", "shutdown.scn"] {
        let text = read_scenario(name);
        let first = run_default(&text);
        let second = run_default(&text);
        assert_eq!(first.trace_json(), second.trace_json(), "{name} trace differs");
        assert_eq!(
            snapshot_pretty(first.world.as_ref().unwrap()),
            snapshot_pretty(second.world.as_ref().unwrap()),
            "{name} snapshot differs"
        );
    }
}

#[test]
fn every_engine_error_is_reachable_from_a_script() {
    let text = read_scenario("errors.scn");
    let outcome = run_default(&text);
    assert_eq!(outcome.exit_code, 0);

    let covered: BTreeSet<String> = parse_scenario(&text)
        .unwrap()
        .into_iter()
        .filter_map(|cmd| match cmd.command {
            Command::ExpectError { error, .. } => Some(error),
            _ => None,
        })
        .collect();
    let all_errors = [
        "DuplicateVault",
        "UnknownVault",
        "UnknownVaultType",
        "CollateralTypeMismatch",
        "BelowDebtFloor",
        "DebtCeilingExceeded",
        "GlobalCeilingExceeded",
        "Undercollateralized",
        "SystemShutdown",
        "InsufficientCollateral",
        "Overpayment",
        "ZeroDebt",
        "ZeroPrice",
        "InsufficientDeposit",
        "UnknownAccount",
        "NotLiquidatable",
        "InsufficientNetDebt",
        "InsufficientNetSurplus",
        "AuctionFailed",
        "InsufficientKeeperMkr",
        "UnknownParameter",
        "InvalidValue",
        "InsufficientMkr",
        "NoQuorum",
        "AlreadyShutdown",
        "NotShutdown",
        "InsufficientDai",
        "NonPositivePrice",
        "UnlistedSource",
        "NoQuotes",
    ];
    for name in all_errors {
        assert!(covered.contains(name), "error {name} not exercised by errors.scn");
    }
    assert_eq!(covered.len(), all_errors.len());
}

#[test]
fn assertion_failure_exits_one_and_stops() {
    let outcome = run_default("init\nassert vow = 5\nset-price ETH 1\n");
    assert_eq!(outcome.exit_code, EXIT_ASSERTION);
    // fail-fast: the third command never ran
    assert_eq!(outcome.trace.len(), 2);
    assert!(outcome.trace[1].status.starts_with("assert-failed"));
}

#[test]
fn engine_error_exits_three_unless_expected() {
    let outcome = run_default("init\nliquidate 9\n");
    assert_eq!(outcome.exit_code, EXIT_ENGINE);
    assert_eq!(outcome.trace[1].status, "error:UnknownVault");

    let outcome = run_default("init\nexpect-error UnknownVault liquidate 9\n");
    assert_eq!(outcome.exit_code, 0);
}

#[test]
fn keep_going_records_failures_and_continues() {
    let options = RunOptions {
        keep_going: true,
        config: ScenarioConfig::default(),
    };
    let outcome =
        run_scenario("init\nassert vow = 5\nset-price ETH 9\nliquidate 9\nassert price ETH = 9\n", &options)
            .unwrap();
    // engine severity dominates the assertion failure
    assert_eq!(outcome.exit_code, EXIT_ENGINE);
    assert_eq!(outcome.trace.len(), 5);
    assert_eq!(outcome.trace[4].status, "ok");
}

#[test]
fn wrong_expected_error_fails() {
    let outcome = run_default("init\nexpect-error Overpayment liquidate 9\n");
    assert_eq!(outcome.exit_code, EXIT_ASSERTION);

    let outcome = run_default("init\nexpect-error Overpayment set-price ETH 9\n");
    assert_eq!(outcome.exit_code, EXIT_ASSERTION);
}

#[test]
fn commands_before_init_are_script_errors() {
    let outcome = run_default("set-price ETH 1\n");
    assert_eq!(outcome.exit_code, EXIT_ENGINE);
    assert!(outcome.trace[0].status.starts_with("script-error"));

    let outcome = run_default("init\nconfig dsr 2\n");
    assert!(outcome.trace[1].status.starts_with("script-error"));

    let outcome = run_default("init\ninit\n");
    assert!(outcome.trace[1].status.starts_with("script-error"));
}

#[test]
fn deltas_track_changed_keys_and_skip_the_journal() {
    let outcome = run_default("init\nvault-create 1 200 2 ETH ETH-A 100\n");
    let entry = &outcome.trace[1];
    assert!(entry.deltas.contains_key("vaults.1.debt"));
    assert!(entry.deltas.contains_key("counters.global"));
    assert!(entry.deltas.contains_key("dai_supply"));
    assert!(!entry.deltas.keys().any(|k| k.starts_with("journal")));
    assert_eq!(entry.deltas["dai_supply"].to, serde_json::json!("100"));
}

#[test]
fn trace_json_shape() {
    let outcome = run_default("init\n");
    let value: serde_json::Value = serde_json::from_str(&outcome.trace_json()).unwrap();
    let first = &value.as_array().unwrap()[0];
    assert_eq!(first["line"], 1);
    assert_eq!(first["verb"], "init");
    assert_eq!(first["status"], "ok");
    assert!(first["deltas"].is_object());
}

#[test]
fn inline_config_overrides_defaults() {
    let outcome = run_default("config penalty-free\n");
    assert_eq!(outcome.exit_code, EXIT_ENGINE, "unknown config keys are rejected");

    let script = "config dsr 10\ninit\nvault-create 1 200 4 ETH ETH-A 100\npot-deposit 200 100\naccrue-dsr 200\nassert pot 200 = 110\n";
    let outcome = run_default(script);
    assert_eq!(outcome.exit_code, 0);
}

#[test]
fn binary_round_trip_with_trace_snapshot_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let trace_a = dir.path().join("a.trace.json");
    let trace_b = dir.path().join("b.trace.json");
    let snap_a = dir.path().join("a.snapshot.json");
    let snap_b = dir.path().join("b.snapshot.json");
    let scenario = scenario_dir().join("scenario1.scn");

    for (trace, snap) in [(&trace_a, &snap_a), (&trace_b, &snap_b)] {
        let status = ProcessCommand::new(env!("CARGO_BIN_EXE_daisim"))
            .args(["run"])
            .arg(&scenario)
            .arg("--trace")
            .arg(trace)
            .arg("--snapshot")
            .arg(snap)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(fs::read(&trace_a).unwrap(), fs::read(&trace_b).unwrap());
    assert_eq!(fs::read(&snap_a).unwrap(), fs::read(&snap_b).unwrap());

    // the snapshot is loadable and passes the standalone checker
    let world = load(&fs::read_to_string(&snap_a).unwrap()).unwrap();
    assert_eq!(*world.vow_balance(), signed("-113"));
    let status = ProcessCommand::new(env!("CARGO_BIN_EXE_daisim"))
        .args(["check"])
        .arg(&snap_a)
        .status()
        .unwrap();
    assert!(status.success());

    // a corrupted counter is caught with exit 3
    let doc = fs::read_to_string(&snap_a).unwrap();
    let corrupt = doc.replace("\"global\": \"0\"", "\"global\": \"1\"");
    assert_ne!(doc, corrupt);
    let bad = dir.path().join("bad.snapshot.json");
    fs::write(&bad, corrupt).unwrap();
    let status = ProcessCommand::new(env!("CARGO_BIN_EXE_daisim"))
        .args(["check"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_ENGINE));
}

#[test]
fn scenario_snapshot_command_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mid.json");
    let script = format!("init\nsnapshot {}\n", path.display());
    let outcome = run_default(&script);
    assert_eq!(outcome.exit_code, 0);
    let world = load(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(*world.target_price(), amt("1"));
}

#[test]
fn toml_config_file_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("setup.toml");
    fs::write(
        &config_path,
        "dai_savings_rate = \"5\"\n\n[prices]\nETH = \"99\"\nMKR = \"10\"\n",
    )
    .unwrap();
    let scenario_path = dir.path().join("s.scn");
    fs::write(&scenario_path, "init\nassert price ETH = 99\n").unwrap();
    let status = ProcessCommand::new(env!("CARGO_BIN_EXE_daisim"))
        .args(["run"])
        .arg(&scenario_path)
        .arg("--config")
        .arg(&config_path)
        .status()
        .unwrap();
    assert!(status.success());
}
