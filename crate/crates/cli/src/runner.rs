//! Applies parsed scenario commands to a world, evaluating assertions,
//! sweeping the accounting identities after every step, and producing a
//! deterministic trace of per-line results and state deltas.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use daisim_engine::amount::SignedAmount;
use daisim_engine::auction::BreakEvenModel;
use daisim_engine::snapshot::{snapshot, snapshot_pretty, to_sorted_value};
use daisim_engine::state::World;
use daisim_engine::{check_accounting, ProtocolError};

use crate::config::{initialize_system, ScenarioConfig};
use crate::parser::{parse_scenario, AssertExpr, Command, ParseError, Query, ScenarioCommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_ENGINE: i32 = 3;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Record failures and keep executing instead of stopping at the first.
    pub keep_going: bool,
    /// Base configuration; inline `config` lines refine it before `init`.
    pub config: ScenarioConfig,
}

/// One changed state key: the JSON leaf before and after the command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub from: Value,
    pub to: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub line: usize,
    pub verb: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub info: Option<String>,
    pub deltas: BTreeMap<String, Delta>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub trace: Vec<TraceEntry>,
    pub world: Option<World>,
    pub exit_code: i32,
}

impl RunOutcome {
    pub fn trace_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.trace).expect("trace serializes");
        text.push('\n');
        text
    }
}

enum StepError {
    Engine(ProtocolError),
    /// Script-level misuse: not initialized, config after init, bad config,
    /// file I/O. Always fatal severity.
    Script(String),
}

impl From<ProtocolError> for StepError {
    fn from(e: ProtocolError) -> Self {
        StepError::Engine(e)
    }
}

fn flatten(value: &Value, prefix: &str, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Object(map) => {
            for (key, child) in map {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten(child, &path, out);
            }
        }
        Value::Array(items) => {
            for (index, child) in items.iter().enumerate() {
                flatten(child, &format!("{prefix}.{index}"), out);
            }
        }
        leaf => {
            out.insert(prefix.to_string(), leaf.clone());
        }
    }
}

/// Leaf-level difference of two world documents, journal excluded.
fn diff_worlds(before: Option<&Value>, after: Option<&Value>) -> BTreeMap<String, Delta> {
    let mut old = BTreeMap::new();
    let mut new = BTreeMap::new();
    if let Some(value) = before {
        flatten(value, "", &mut old);
    }
    if let Some(value) = after {
        flatten(value, "", &mut new);
    }
    old.retain(|key, _| !key.starts_with("journal"));
    new.retain(|key, _| !key.starts_with("journal"));
    let mut deltas = BTreeMap::new();
    for (key, to) in &new {
        match old.get(key) {
            Some(from) if from == to => {}
            Some(from) => {
                deltas.insert(
                    key.clone(),
                    Delta {
                        from: from.clone(),
                        to: to.clone(),
                    },
                );
            }
            None => {
                deltas.insert(
                    key.clone(),
                    Delta {
                        from: Value::Null,
                        to: to.clone(),
                    },
                );
            }
        }
    }
    for (key, from) in old {
        if !new.contains_key(&key) {
            deltas.insert(
                key,
                Delta {
                    from,
                    to: Value::Null,
                },
            );
        }
    }
    deltas
}

fn evaluate_query(world: &World, query: &Query) -> Result<SignedAmount, ProtocolError> {
    Ok(match query {
        Query::Vow => world.vow_balance().clone(),
        Query::NetDebt => world.net_debt().to_signed(),
        Query::NetSurplus => world.net_surplus().to_signed(),
        Query::MkrSupply => world.mkr().total_supply.to_signed(),
        Query::DaiSupply => world.dai_supply().to_signed(),
        Query::Price(token) => world
            .effective_price(&token.as_str().into())
            .ok_or_else(|| ProtocolError::ZeroPrice(token.clone()))?
            .to_signed(),
        Query::VaultDebt(id) => world.vault(id)?.debt.to_signed(),
        Query::VaultCollateral(id) => world.vault(id)?.collateral_amount.to_signed(),
        Query::CollateralRatio(id) => world.collateral_ratio(id)?.to_signed(),
        Query::Pot(address) => world
            .pot_deposit(address)
            .ok_or_else(|| ProtocolError::UnknownAccount(address.clone()))?
            .to_signed(),
        Query::Dai(account) => world.dai_balance(account).to_signed(),
        Query::Mkr(account) => world.mkr().balance(account).to_signed(),
    })
}

struct Session {
    config: ScenarioConfig,
    world: Option<World>,
}

impl Session {
    fn world(&mut self) -> Result<&mut World, StepError> {
        self.world
            .as_mut()
            .ok_or_else(|| StepError::Script("world not initialized; run `init` first".into()))
    }

    /// Executes one command, returning an optional info string.
    fn execute(&mut self, command: &Command) -> Result<Option<String>, StepError> {
        match command {
            Command::Config(args) => {
                if self.world.is_some() {
                    return Err(StepError::Script(
                        "config lines must precede init".into(),
                    ));
                }
                let args: Vec<&str> = args.iter().map(String::as_str).collect();
                self.config
                    .apply_line(&args)
                    .map_err(|e| StepError::Script(e.to_string()))?;
                Ok(None)
            }
            Command::Init => {
                if self.world.is_some() {
                    return Err(StepError::Script("world already initialized".into()));
                }
                let world =
                    initialize_system(&self.config).map_err(|e| StepError::Script(e.to_string()))?;
                self.world = Some(world);
                Ok(Some("world initialized".into()))
            }
            Command::SetPrice { token, price } => {
                self.world()?.set_price(&token.as_str().into(), price.clone())?;
                Ok(None)
            }
            Command::Quote { token, source, price } => {
                self.world()?
                    .submit_quote(&token.as_str().into(), source, price.clone())?;
                Ok(None)
            }
            Command::Poke { token } => {
                self.world()?.poke_median(&token.as_str().into())?;
                Ok(None)
            }
            Command::TickOsm => {
                self.world()?.advance_osm();
                Ok(None)
            }
            Command::VaultCreate {
                vault_id,
                owner,
                collateral,
                asset,
                vault_type,
                debt,
            } => {
                let id = self.world()?.create_vault(
                    vault_id.as_deref(),
                    owner,
                    collateral.clone(),
                    &asset.as_str().into(),
                    vault_type,
                    debt.clone(),
                )?;
                Ok(Some(format!("vault {id}")))
            }
            Command::Deposit { vault_id, amount } => {
                self.world()?.deposit_collateral(vault_id, amount)?;
                Ok(None)
            }
            Command::Withdraw { vault_id, amount } => {
                self.world()?.withdraw_collateral(vault_id, amount)?;
                Ok(None)
            }
            Command::Generate { vault_id, amount } => {
                self.world()?.generate_dai(vault_id, amount)?;
                Ok(None)
            }
            Command::Repay { vault_id, amount } => {
                self.world()?.repay_debt(vault_id, amount)?;
                Ok(None)
            }
            Command::AccrueFees { vault_id } => {
                let interest = self.world()?.accrue_stability_fee(vault_id)?;
                Ok(Some(format!("interest {interest}")))
            }
            Command::PotDeposit { address, amount } => {
                self.world()?.pot_deposit_dai(address, amount)?;
                Ok(None)
            }
            Command::PotWithdraw { address, amount } => {
                self.world()?.pot_withdraw_dai(address, amount)?;
                Ok(None)
            }
            Command::AccrueDsr { address } => match address {
                Some(address) => {
                    let interest = self.world()?.accrue_savings(address)?;
                    Ok(Some(format!("interest {interest}")))
                }
                None => {
                    self.world()?.accrue_savings_all()?;
                    Ok(Some("accrued every pot account".into()))
                }
            },
            Command::Liquidate { vault_id } => {
                let world = self.world()?;
                let model = BreakEvenModel::new(world.auction_params().clone());
                let report = world.liquidate(vault_id, &model)?;
                let info = if report.auction.succeeded {
                    format!(
                        "auction succeeded: offered {}, received {}, remaining {}, proceedings {}",
                        report.auction.dai_offered,
                        report.auction.collateral_received,
                        report.auction.remaining_collateral,
                        report.auction.proceedings
                    )
                } else {
                    format!(
                        "auction failed: offered {} of {} required; vow absorbs {}",
                        report.auction.dai_offered, report.total_debt, report.total_debt
                    )
                };
                Ok(Some(info))
            }
            Command::Heal {
                debt_threshold,
                surplus_threshold,
            } => {
                let world = self.world()?;
                let model = BreakEvenModel::new(world.auction_params().clone());
                world.heal(&model, debt_threshold, surplus_threshold)?;
                Ok(None)
            }
            Command::DebtAuction { amount } => {
                let world = self.world()?;
                let model = BreakEvenModel::new(world.auction_params().clone());
                world.run_debt_auction(&model, amount)?;
                Ok(None)
            }
            Command::SurplusAuction { amount } => {
                let world = self.world()?;
                let model = BreakEvenModel::new(world.auction_params().clone());
                world.run_surplus_auction(&model, amount)?;
                Ok(None)
            }
            Command::SetParam { name, scope, value } => {
                self.world()?.set_param(name, scope.as_deref(), value.clone())?;
                Ok(None)
            }
            Command::EsmLock { account, amount } => {
                self.world()?.lock_esm(account, amount)?;
                Ok(None)
            }
            Command::Shutdown => {
                let report = self.world()?.emergency_shutdown()?;
                let mut pool = String::new();
                for (token, amount) in &report.redemption_pool {
                    let _ = write!(pool, " {token}={amount}");
                }
                Ok(Some(format!(
                    "burned {} MKR; redemption pool{}",
                    report.mkr_burned,
                    if pool.is_empty() { " empty".into() } else { pool }
                )))
            }
            Command::EndCooldown => {
                self.world()?.end_cooldown()?;
                Ok(None)
            }
            Command::Redeem { holder, amount } => {
                let payouts = self.world()?.redeem_dai(holder, amount)?;
                let mut text = String::from("paid");
                if payouts.is_empty() {
                    text.push_str(" nothing");
                } else {
                    for (token, paid) in &payouts {
                        let _ = write!(text, " {token}={paid}");
                    }
                }
                Ok(Some(text))
            }
            Command::Snapshot { path } => {
                let world = self.world()?;
                match path {
                    Some(path) => {
                        std::fs::write(path, snapshot_pretty(world))
                            .map_err(|e| StepError::Script(format!("snapshot {path}: {e}")))?;
                        Ok(Some(format!("wrote {path}")))
                    }
                    None => Ok(Some(snapshot(world))),
                }
            }
            Command::Note { text } => Ok(Some(text.clone())),
            Command::Assert(_) | Command::ExpectError { .. } => {
                unreachable!("handled by the step loop")
            }
        }
    }
}

/// Parses and runs a scenario. `Err` carries a parse failure (exit 2); the
/// returned outcome carries every other result.
pub fn run_scenario(text: &str, options: &RunOptions) -> Result<RunOutcome, ParseError> {
    let commands = parse_scenario(text)?;
    Ok(run_commands(&commands, options))
}

fn run_commands(commands: &[ScenarioCommand], options: &RunOptions) -> RunOutcome {
    let mut session = Session {
        config: options.config.clone(),
        world: None,
    };
    let mut trace = Vec::new();
    let mut exit_code = EXIT_OK;

    for command in commands {
        let before = session.world.as_ref().map(to_sorted_value);
        let mut info = None;
        let mut severity = EXIT_OK;
        let status = match &command.command {
            Command::Assert(expr) => match run_assert(&mut session, expr) {
                Ok(status) => status,
                Err((code, status)) => {
                    severity = code;
                    status
                }
            },
            Command::ExpectError { error, inner } => {
                // assert inside expect-error exists to catch query errors
                let inner_result = match &inner.command {
                    Command::Assert(expr) => match &session.world {
                        None => Err(StepError::Script(
                            "world not initialized; run `init` first".into(),
                        )),
                        Some(world) => evaluate_query(world, &expr.query)
                            .map(|actual| Some(format!("query evaluated to {actual}")))
                            .map_err(StepError::Engine),
                    },
                    other => session.execute(other),
                };
                match inner_result {
                    Err(StepError::Engine(e)) if e.name() == error => {
                        info = Some(format!("caught {e}"));
                        "ok".to_string()
                    }
                    Ok(_) => {
                        severity = EXIT_ASSERTION;
                        format!("expect-failed: {error} not raised, command succeeded")
                    }
                    Err(StepError::Engine(e)) => {
                        severity = EXIT_ASSERTION;
                        format!("expect-failed: wanted {error}, got {}", e.name())
                    }
                    Err(StepError::Script(message)) => {
                        severity = EXIT_ENGINE;
                        format!("script-error: {message}")
                    }
                }
            }
            other => match session.execute(other) {
                Ok(step_info) => {
                    info = step_info;
                    "ok".to_string()
                }
                Err(StepError::Engine(e)) => {
                    severity = EXIT_ENGINE;
                    info = Some(e.to_string());
                    format!("error:{}", e.name())
                }
                Err(StepError::Script(message)) => {
                    severity = EXIT_ENGINE;
                    format!("script-error: {message}")
                }
            },
        };

        // the accounting identities must survive every step
        let mut status = status;
        if severity == EXIT_OK {
            if let Some(world) = &session.world {
                let report = check_accounting(world);
                if !report.healthy() {
                    severity = EXIT_ENGINE;
                    let mut message = String::from("invariant violation:");
                    for violation in &report.violations {
                        let _ = write!(message, " [{violation}]");
                    }
                    status = message;
                }
            }
        }

        let after = session.world.as_ref().map(to_sorted_value);
        trace.push(TraceEntry {
            line: command.line,
            verb: command.verb.clone(),
            status: status.clone(),
            info,
            deltas: diff_worlds(before.as_ref(), after.as_ref()),
        });

        if severity > exit_code {
            exit_code = severity;
        }
        if severity != EXIT_OK && !options.keep_going {
            break;
        }
    }

    RunOutcome {
        trace,
        world: session.world,
        exit_code,
    }
}

fn run_assert(session: &mut Session, expr: &AssertExpr) -> Result<String, (i32, String)> {
    let world = match &session.world {
        Some(world) => world,
        None => {
            return Err((
                EXIT_ENGINE,
                "script-error: world not initialized; run `init` first".to_string(),
            ))
        }
    };
    match evaluate_query(world, &expr.query) {
        Ok(actual) => {
            if expr.cmp.holds(&actual, &expr.value) {
                Ok("ok".to_string())
            } else {
                Err((
                    EXIT_ASSERTION,
                    format!(
                        "assert-failed: {} is {actual}, wanted {} {}",
                        expr.query, expr.cmp, expr.value
                    ),
                ))
            }
        }
        Err(e) => Err((EXIT_ENGINE, format!("error:{}", e.name()))),
    }
}
