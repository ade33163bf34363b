//! Accounting identities, recomputed from scratch against the tracked
//! counters. Violations are data, not exceptions: the checker never fails, it
//! reports.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::state::World;

/// One broken identity: the state key at fault and what went wrong.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

/// Result of one accounting sweep. `lints` are advisory policy findings
/// (e.g. a stability fee below the savings rate), never hard violations.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AccountingReport {
    pub violations: Vec<Violation>,
    pub lints: Vec<Violation>,
}

impl AccountingReport {
    pub fn healthy(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for AccountingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.healthy() && self.lints.is_empty() {
            return write!(f, "accounting: ok");
        }
        for v in &self.violations {
            writeln!(f, "violation {v}")?;
        }
        for l in &self.lints {
            writeln!(f, "lint {l}")?;
        }
        Ok(())
    }
}

/// Recomputes every conservation identity by brute force:
/// (a) the global counter equals the sum of per-type counters,
/// (b) each per-type counter equals the summed debt of its vaults,
/// (c) the DAI supply equals holdings plus pot deposits,
/// (d) every vault record satisfies its own invariants,
/// plus MKR supply covering tracked accounts and vault-type parameter sanity.
pub fn check_accounting(world: &World) -> AccountingReport {
    let mut report = AccountingReport::default();
    let mut violation = |key: &str, message: String| {
        report.violations.push(Violation {
            key: key.to_string(),
            message,
        });
    };

    // (a) global counter vs per-type counters
    let per_type_sum = world
        .counters()
        .per_type
        .values()
        .fold(Amount::zero(), |acc, v| &acc + v);
    if per_type_sum != world.counters().global {
        violation(
            "counters.global",
            format!(
                "global counter {} differs from per-type sum {}",
                world.counters().global,
                per_type_sum
            ),
        );
    }

    // (b) per-type counters vs summed vault debt
    let mut debt_by_type: BTreeMap<&str, Amount> = BTreeMap::new();
    for vault in world.vaults().values() {
        let entry = debt_by_type
            .entry(vault.vault_type.as_str())
            .or_insert_with(Amount::zero);
        *entry += &vault.debt;
    }
    for (vault_type, counter) in &world.counters().per_type {
        let actual = debt_by_type
            .get(vault_type.as_str())
            .cloned()
            .unwrap_or_else(Amount::zero);
        if actual != *counter {
            violation(
                &format!("counters.per_type.{vault_type}"),
                format!("counter {counter} differs from summed vault debt {actual}"),
            );
        }
    }
    for vault_type in debt_by_type.keys() {
        if !world.counters().per_type.contains_key(*vault_type) {
            violation(
                &format!("counters.per_type.{vault_type}"),
                "vaults carry debt for a type with no counter".to_string(),
            );
        }
    }

    // (c) DAI supply conservation
    let holdings_sum = world
        .dai_holdings()
        .values()
        .fold(Amount::zero(), |acc, v| &acc + v);
    let pot_sum = world.pot().values().fold(Amount::zero(), |acc, v| &acc + v);
    let backed = &holdings_sum + &pot_sum;
    if backed != *world.dai_supply() {
        violation(
            "dai_supply",
            format!(
                "supply {} differs from holdings {} + pot {}",
                world.dai_supply(),
                holdings_sum,
                pot_sum
            ),
        );
    }

    // (d) per-vault invariants
    for (id, vault) in world.vaults() {
        match world.vault_types().get(&vault.vault_type) {
            None => violation(
                &format!("vaults.{id}.vault_type"),
                format!("unknown vault type {:?}", vault.vault_type),
            ),
            Some(params) => {
                if params.collateral != vault.collateral_asset {
                    violation(
                        &format!("vaults.{id}.collateral_asset"),
                        format!(
                            "vault holds {} but its type takes {}",
                            vault.collateral_asset, params.collateral
                        ),
                    );
                }
                if !vault.debt.is_zero() && vault.debt < params.debt_floor {
                    violation(
                        &format!("vaults.{id}.debt"),
                        format!(
                            "debt {} sits below the floor {} without being zero",
                            vault.debt, params.debt_floor
                        ),
                    );
                }
            }
        }
    }

    // MKR supply covers every tracked account
    let mkr_sum = world
        .mkr()
        .shareholder_accounts
        .values()
        .fold(Amount::zero(), |acc, v| &acc + v);
    if mkr_sum > world.mkr().total_supply {
        violation(
            "mkr.total_supply",
            format!(
                "tracked accounts hold {} exceeding total supply {}",
                mkr_sum,
                world.mkr().total_supply
            ),
        );
    }

    // vault-type parameter sanity (snapshots can carry corrupted params)
    for (id, params) in world.vault_types() {
        if params.validate(id).is_err() {
            violation(
                &format!("vault_types.{id}"),
                "parameters violate their invariants".to_string(),
            );
        }
    }

    // advisory: a stability fee below the savings rate leaks unbacked debt
    for (id, params) in world.vault_types() {
        if params.stability_fee_rate < *world.dai_savings_rate() {
            report.lints.push(Violation {
                key: format!("vault_types.{id}.stability_fee_rate"),
                message: format!(
                    "fee rate {} below the savings rate {}",
                    params.stability_fee_rate,
                    world.dai_savings_rate()
                ),
            });
        }
    }

    report
}
