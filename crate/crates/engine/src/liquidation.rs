//! Liquidation of undercollateralized vaults and the two-phase collateral
//! auction that clears them.

use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::auction::{AuctionModel, PriceSource};
use crate::error::{ProtocolError, Result};
use crate::state::{DaiCause, TokenSymbol, VowCause, World};
use crate::vault::collateralization_ratio;

/// Result of clearing one collateral auction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollateralAuctionOutcome {
    pub succeeded: bool,
    /// Winning DAI bid from the direct phase (best offer even on failure).
    pub dai_offered: Amount,
    /// Collateral the winner accepted in the reverse phase.
    pub collateral_received: Amount,
    /// Lot minus received; returned to the vault owner.
    pub remaining_collateral: Amount,
    /// Offer minus total debt; credited to the vow.
    pub proceedings: Amount,
}

impl CollateralAuctionOutcome {
    fn failed(lot: &Amount, best_offer: Amount) -> Self {
        CollateralAuctionOutcome {
            succeeded: false,
            dai_offered: best_offer,
            collateral_received: Amount::zero(),
            remaining_collateral: lot.clone(),
            proceedings: Amount::zero(),
        }
    }
}

/// What a liquidation did to the vault and the vow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiquidationReport {
    pub vault_id: String,
    /// Debt cleared from the vault (pre-penalty).
    pub debt: Amount,
    /// Debt grossed up by the liquidation penalty; what the auction must cover.
    pub total_debt: Amount,
    pub auction: CollateralAuctionOutcome,
}

/// Two-phase clearing: a direct auction sells the lot for DAI, and if the
/// offer covers the debt a reverse auction shrinks the collateral handed
/// over. Failure is a value, not an error.
pub fn collateral_auction(
    model: &dyn AuctionModel,
    lot: &Amount,
    asset: &TokenSymbol,
    total_debt: &Amount,
    prices: &dyn PriceSource,
) -> CollateralAuctionOutcome {
    let offer = match model.resolve_direct(lot, asset, &TokenSymbol::dai(), prices) {
        Some(offer) => offer,
        None => return CollateralAuctionOutcome::failed(lot, Amount::zero()),
    };
    if offer < *total_debt {
        return CollateralAuctionOutcome::failed(lot, offer);
    }
    let received = match model.resolve_reverse(&offer, &TokenSymbol::dai(), asset, Some(lot), prices)
    {
        Some(received) if !received.is_zero() => received,
        _ => return CollateralAuctionOutcome::failed(lot, offer),
    };
    CollateralAuctionOutcome {
        succeeded: true,
        remaining_collateral: lot - &received,
        proceedings: &offer - total_debt,
        dai_offered: offer,
        collateral_received: received,
    }
}

impl World {
    /// True iff the vault's collateralization ratio sits strictly below its
    /// type's liquidation ratio. Sitting exactly at the threshold is safe.
    pub fn is_liquidatable(&self, vault_id: &str) -> Result<bool> {
        let vault = self.vault(vault_id)?;
        if vault.debt.is_zero() {
            return Ok(false);
        }
        let price = self.require_price(&vault.collateral_asset)?;
        let ratio = collateralization_ratio(vault, &price)?;
        let required = &self.vault_type(&vault.vault_type)?.liquidation_ratio;
        Ok(ratio < *required)
    }

    /// Bites an unsafe vault: clears its debt, seizes the collateral, runs
    /// the collateral auction, and settles the vow with the outcome.
    ///
    /// On success the keeper's payment retires the vault's minted DAI
    /// (burned from the owner, externally funded if short), leftover
    /// collateral returns to the vault and the surplus over the penalized
    /// debt credits the vow. On failure all collateral returns and the vow
    /// absorbs the penalized debt as sin.
    pub fn liquidate(
        &mut self,
        vault_id: &str,
        model: &dyn AuctionModel,
    ) -> Result<LiquidationReport> {
        if !self.is_liquidatable(vault_id)? {
            return Err(ProtocolError::NotLiquidatable(vault_id.to_string()));
        }
        let vault = self.vault(vault_id)?.clone();
        let debt = vault.debt.clone();
        let lot = vault.collateral_amount.clone();
        let penalty = self
            .vault_type(&vault.vault_type)?
            .liquidation_penalty
            .clone();
        let total_debt = &debt + &debt.percent(&penalty);

        // Forced wind-down: no floor, ratio or liveness guards apply here.
        {
            let record = self.vaults.get_mut(vault_id).expect("vault exists");
            record.debt = Amount::zero();
            record.collateral_amount = Amount::zero();
        }
        self.counters_sub(&vault.vault_type, &debt);

        let outcome =
            collateral_auction(model, &lot, &vault.collateral_asset, &total_debt, &*self);
        if outcome.succeeded {
            self.deposit_collateral_unchecked(vault_id, &outcome.remaining_collateral);
            self.vow_apply(VowCause::AuctionProceeds, outcome.proceedings.to_signed());
            self.burn_dai_funded(DaiCause::LiquidationBurn, &vault.owner_id, &debt);
        } else {
            self.deposit_collateral_unchecked(vault_id, &lot);
            self.vow_apply(VowCause::LiquidationShortfall, -&total_debt.to_signed());
        }
        Ok(LiquidationReport {
            vault_id: vault_id.to_string(),
            debt,
            total_debt,
            auction: outcome,
        })
    }
}
