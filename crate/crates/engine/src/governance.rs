//! Governance parameter setters, the MKR majority rule behind the emergency
//! shutdown module, and the four-step shutdown procedure with
//! excess-collateral withdrawal and DAI redemption.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::error::{ProtocolError, Result};
use crate::state::{DaiCause, JournalEntry, ShutdownState, SystemPhase, TokenSymbol, World};

/// Account MKR is locked into to vote for emergency shutdown.
pub const ESM_ACCOUNT: &str = "esm";

/// The governance-settable parameter names.
pub const PARAMETER_NAMES: &[&str] = &[
    "stability-fee-rate",
    "liquidation-ratio",
    "liquidation-penalty",
    "debt-floor",
    "debt-ceiling",
    "global-debt-ceiling",
    "dai-savings-rate",
];

/// What the shutdown procedure did, for traces and reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShutdownReport {
    pub mkr_burned: Amount,
    /// Excess collateral handed back per vault: (vault, owner, token, amount).
    pub refunds: Vec<(String, String, TokenSymbol, Amount)>,
    /// Collateral short of covering debt at the freeze, per vault.
    pub shortfalls: Vec<(String, TokenSymbol, Amount)>,
    pub redemption_pool: BTreeMap<TokenSymbol, Amount>,
}

impl World {
    /// Replaces exactly one governance parameter. Existing vaults are not
    /// re-checked; a ratio raise can deliberately render them liquidatable.
    pub fn set_param(&mut self, name: &str, scope: Option<&str>, value: Amount) -> Result<()> {
        self.require_live()?;
        if !PARAMETER_NAMES.contains(&name) {
            return Err(ProtocolError::UnknownParameter(name.to_string()));
        }
        let global = matches!(name, "global-debt-ceiling" | "dai-savings-rate");
        match (global, scope) {
            (true, Some(s)) => {
                return Err(ProtocolError::InvalidValue {
                    parameter: name.to_string(),
                    value: value.to_string(),
                    reason: format!("global parameter takes no vault-type scope, got {s:?}"),
                })
            }
            (false, None) => {
                return Err(ProtocolError::InvalidValue {
                    parameter: name.to_string(),
                    value: value.to_string(),
                    reason: "requires a vault-type scope".to_string(),
                })
            }
            _ => {}
        }
        if let Some(vault_type) = scope {
            let params = self.vault_type(vault_type)?;
            let invalid = |reason: &str| ProtocolError::InvalidValue {
                parameter: name.to_string(),
                value: value.to_string(),
                reason: reason.to_string(),
            };
            match name {
                "liquidation-ratio" if value <= Amount::from_int(100) => {
                    return Err(invalid("must exceed 100"))
                }
                "debt-floor" if value > params.debt_ceiling => {
                    return Err(invalid("exceeds the debt ceiling"))
                }
                "debt-ceiling" if value < params.debt_floor => {
                    return Err(invalid("below the debt floor"))
                }
                _ => {}
            }
            let params = self.vault_types.get_mut(vault_type).expect("checked above");
            match name {
                "stability-fee-rate" => params.stability_fee_rate = value.clone(),
                "liquidation-ratio" => params.liquidation_ratio = value.clone(),
                "liquidation-penalty" => params.liquidation_penalty = value.clone(),
                "debt-floor" => params.debt_floor = value.clone(),
                "debt-ceiling" => params.debt_ceiling = value.clone(),
                _ => unreachable!("scoped parameter"),
            }
        } else {
            match name {
                "global-debt-ceiling" => self.counters.global_debt_ceiling = value.clone(),
                "dai-savings-rate" => self.dai_savings_rate = value.clone(),
                _ => unreachable!("global parameter"),
            }
        }
        self.journal_push(JournalEntry::ParameterSet {
            parameter: name.to_string(),
            scope: scope.map(str::to_string),
            value,
        });
        Ok(())
    }

    /// Reads a parameter back; mirror of [`World::set_param`].
    pub fn get_param(&self, name: &str, scope: Option<&str>) -> Result<Amount> {
        if !PARAMETER_NAMES.contains(&name) {
            return Err(ProtocolError::UnknownParameter(name.to_string()));
        }
        match scope {
            Some(vault_type) => {
                let params = self.vault_type(vault_type)?;
                Ok(match name {
                    "stability-fee-rate" => params.stability_fee_rate.clone(),
                    "liquidation-ratio" => params.liquidation_ratio.clone(),
                    "liquidation-penalty" => params.liquidation_penalty.clone(),
                    "debt-floor" => params.debt_floor.clone(),
                    "debt-ceiling" => params.debt_ceiling.clone(),
                    other => return Err(ProtocolError::UnknownParameter(other.to_string())),
                })
            }
            None => Ok(match name {
                "global-debt-ceiling" => self.counters.global_debt_ceiling.clone(),
                "dai-savings-rate" => self.dai_savings_rate.clone(),
                other => return Err(ProtocolError::UnknownParameter(other.to_string())),
            }),
        }
    }

    /// True iff the account holds strictly more than half of all MKR.
    pub fn has_majority(&self, account: &str) -> bool {
        let balance = self.mkr.balance(account);
        &balance + &balance > self.mkr.total_supply
    }

    /// Locks MKR into the emergency shutdown module account.
    pub fn lock_esm(&mut self, from: &str, amount: &Amount) -> Result<()> {
        let held = self.mkr.balance(from);
        if held < *amount {
            return Err(ProtocolError::InsufficientMkr {
                account: from.to_string(),
                held: held.to_string(),
                requested: amount.to_string(),
            });
        }
        if amount.is_zero() {
            return Ok(());
        }
        *self.mkr.shareholder_accounts.get_mut(from).expect("checked") -= amount;
        *self
            .mkr
            .shareholder_accounts
            .entry(ESM_ACCOUNT.to_string())
            .or_insert_with(Amount::zero) += amount;
        self.journal_push(JournalEntry::MkrTransferred {
            from: from.to_string(),
            to: ESM_ACCOUNT.to_string(),
            amount: amount.clone(),
        });
        Ok(())
    }

    pub fn esm_active(&self) -> bool {
        self.has_majority(ESM_ACCOUNT)
    }

    /// Excess collateral a vault owner can claim at settlement: what remains
    /// after reserving debt × target_price / collateral_price, clamped at
    /// zero. Uses the frozen price after shutdown, the live price before.
    pub fn excess_collateral(&self, vault_id: &str) -> Result<(Amount, TokenSymbol)> {
        let vault = self.vault(vault_id)?;
        if vault.debt.is_zero() {
            return Ok((vault.collateral_amount.clone(), vault.collateral_asset.clone()));
        }
        let price = self.require_price(&vault.collateral_asset)?;
        let needed = &(&vault.debt * &self.target_price) / &price;
        let excess = vault
            .collateral_amount
            .checked_sub(&needed)
            .unwrap_or_else(Amount::zero);
        Ok((excess, vault.collateral_asset.clone()))
    }

    /// Triggers the emergency shutdown once a strict MKR majority sits in the
    /// esm account: freezes prices, zeroes the savings rate, burns the locked
    /// MKR, winds down every vault (owners withdraw their excess collateral,
    /// the rest becomes the redemption pool), and fixes the final
    /// per-collateral redemption prices adjusted for system surplus or debt.
    pub fn emergency_shutdown(&mut self) -> Result<ShutdownReport> {
        if !self.is_live() {
            return Err(ProtocolError::AlreadyShutdown);
        }
        if !self.esm_active() {
            return Err(ProtocolError::NoQuorum);
        }
        let frozen_prices: BTreeMap<TokenSymbol, Amount> = self
            .feeds
            .iter()
            .filter_map(|(token, feed)| feed.current_price.clone().map(|p| (token.clone(), p)))
            .collect();
        // Every indebted vault needs a frozen price to settle against.
        for (id, vault) in &self.vaults {
            if !vault.debt.is_zero() {
                match frozen_prices.get(&vault.collateral_asset) {
                    Some(p) if !p.is_zero() => {}
                    _ => {
                        let _ = id;
                        return Err(ProtocolError::ZeroPrice(vault.collateral_asset.to_string()));
                    }
                }
            }
        }

        self.dai_savings_rate = Amount::zero();
        let locked = self.mkr.balance(ESM_ACCOUNT);
        self.burn_mkr_exact(ESM_ACCOUNT, &locked);

        let mut refunds = Vec::new();
        let mut shortfalls = Vec::new();
        let mut pool: BTreeMap<TokenSymbol, Amount> = BTreeMap::new();
        let vault_ids: Vec<String> = self.vaults.keys().cloned().collect();
        for id in &vault_ids {
            let vault = self.vaults[id].clone();
            let mut refund = |world: &mut World, excess: Amount| {
                if !excess.is_zero() {
                    world.journal_push(JournalEntry::CollateralReturned {
                        vault_id: id.clone(),
                        owner_id: vault.owner_id.clone(),
                        token: vault.collateral_asset.clone(),
                        amount: excess.clone(),
                    });
                    refunds.push((
                        id.clone(),
                        vault.owner_id.clone(),
                        vault.collateral_asset.clone(),
                        excess,
                    ));
                }
            };
            let reserved = if vault.debt.is_zero() {
                // Debt-free vaults refund everything.
                refund(self, vault.collateral_amount.clone());
                Amount::zero()
            } else {
                let price = &frozen_prices[&vault.collateral_asset];
                let needed = &(&vault.debt * &self.target_price) / price;
                match vault.collateral_amount.checked_sub(&needed) {
                    Some(excess) => {
                        refund(self, excess);
                        needed
                    }
                    None => {
                        let shortfall = &needed - &vault.collateral_amount;
                        self.journal_push(JournalEntry::ShutdownShortfall {
                            vault_id: id.clone(),
                            token: vault.collateral_asset.clone(),
                            amount: shortfall.clone(),
                        });
                        shortfalls.push((id.clone(), vault.collateral_asset.clone(), shortfall));
                        vault.collateral_amount.clone()
                    }
                }
            };
            if !reserved.is_zero() {
                *pool
                    .entry(vault.collateral_asset.clone())
                    .or_insert_with(Amount::zero) += &reserved;
            }
            if !vault.debt.is_zero() {
                self.counters_sub(&vault.vault_type, &vault.debt);
            }
            let record = self.vaults.get_mut(id).expect("vault exists");
            record.debt = Amount::zero();
            record.collateral_amount = Amount::zero();
        }

        let pool_value = pool.iter().fold(Amount::zero(), |acc, (token, amount)| {
            &acc + &(amount * &frozen_prices[token])
        });
        let supply = self.dai_supply.clone();
        let claimable = &pool_value.to_signed() + &self.vow_balance;
        let mut adjusted = BTreeMap::new();
        if !pool_value.is_zero() && !supply.is_zero() && !claimable.positive_part().is_zero() {
            let claimable = claimable.positive_part();
            // adjusted price = frozen * supply * target / (pool value + vow):
            // surplus cheapens collateral for redeemers, deficit dears it.
            let scale = &(&supply * &self.target_price) / &claimable;
            for token in pool.keys() {
                adjusted.insert(token.clone(), &frozen_prices[token] * &scale);
            }
        }

        self.phase = SystemPhase::Shutdown(Box::new(ShutdownState {
            cooldown_ended: false,
            frozen_prices,
            redemption_pool: pool.clone(),
            pool_at_freeze: pool.clone(),
            vow_at_freeze: self.vow_balance.clone(),
            dai_supply_at_freeze: supply,
            adjusted_redemption_price: adjusted,
        }));

        Ok(ShutdownReport {
            mkr_burned: locked,
            refunds,
            shortfalls,
            redemption_pool: pool,
        })
    }

    /// Ends the post-shutdown cooldown window; redemption opens here.
    pub fn end_cooldown(&mut self) -> Result<()> {
        match &mut self.phase {
            SystemPhase::Live => Err(ProtocolError::NotShutdown),
            SystemPhase::Shutdown(state) => {
                state.cooldown_ended = true;
                Ok(())
            }
        }
    }

    /// Exchanges DAI for a pro-rata share of every pooled collateral at the
    /// adjusted redemption prices. Returns the collateral paid out per token.
    pub fn redeem_dai(
        &mut self,
        holder: &str,
        amount: &Amount,
    ) -> Result<BTreeMap<TokenSymbol, Amount>> {
        let state = match &self.phase {
            SystemPhase::Shutdown(s) if s.cooldown_ended => (**s).clone(),
            _ => return Err(ProtocolError::NotShutdown),
        };
        let held = self.dai_balance(holder);
        if held < *amount {
            return Err(ProtocolError::InsufficientDai {
                held: held.to_string(),
                requested: amount.to_string(),
            });
        }
        if amount.is_zero() {
            return Ok(BTreeMap::new());
        }
        self.burn_dai_exact(DaiCause::Redemption, holder, amount);

        let freeze_value = state
            .pool_at_freeze
            .iter()
            .fold(Amount::zero(), |acc, (token, pooled)| {
                &acc + &(pooled * &state.frozen_prices[token])
            });
        let mut payouts = BTreeMap::new();
        if freeze_value.is_zero() {
            return Ok(payouts);
        }
        for (token, pooled_at_freeze) in &state.pool_at_freeze {
            let adjusted = match state.adjusted_redemption_price.get(token) {
                Some(p) => p,
                None => continue,
            };
            let weight = &(pooled_at_freeze * &state.frozen_prices[token]) / &freeze_value;
            let units = &(&(amount * &weight) * &self.target_price) / adjusted;
            let paid = {
                let available = match &self.phase {
                    SystemPhase::Shutdown(s) => s
                        .redemption_pool
                        .get(token)
                        .cloned()
                        .unwrap_or_else(Amount::zero),
                    SystemPhase::Live => unreachable!("checked above"),
                };
                units.min(available)
            };
            if paid.is_zero() {
                continue;
            }
            if let SystemPhase::Shutdown(s) = &mut self.phase {
                *s.redemption_pool.get_mut(token).expect("pooled token") -= &paid;
            }
            self.journal_push(JournalEntry::CollateralRedeemed {
                holder_id: holder.to_string(),
                token: token.clone(),
                amount: paid.clone(),
            });
            payouts.insert(token.clone(), paid);
        }
        Ok(payouts)
    }
}
