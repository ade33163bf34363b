//! System surplus and debt accounting, resolved through debt auctions (mint
//! MKR for DAI) and surplus auctions (sell DAI for MKR, burn the MKR).

use crate::amount::{Amount, SignedAmount};
use crate::auction::AuctionModel;
use crate::error::{ProtocolError, Result};
use crate::state::{DaiCause, TokenSymbol, VowCause, World};

/// Aggregate account holding keeper-side DAI and MKR, so auction mints and
/// burns stay ledgered.
pub const KEEPERS_ACCOUNT: &str = "keepers";

impl World {
    /// Replaces the vow balance outright; the change is journaled as manual.
    pub fn set_vow_balance(&mut self, balance: SignedAmount) {
        let delta = &balance - &self.vow_balance;
        self.vow_apply(VowCause::Manual, delta);
    }

    /// max(0, -vow): unbacked debt awaiting recapitalization.
    pub fn net_debt(&self) -> Amount {
        self.vow_balance.negative_part()
    }

    /// max(0, vow): surplus available for auctioning off.
    pub fn net_surplus(&self) -> Amount {
        self.vow_balance.positive_part()
    }

    /// Covers `dai_to_pay` of net debt by a reverse auction that mints MKR to
    /// the winning keeper. The paid DAI is burnt.
    pub fn run_debt_auction(&mut self, model: &dyn AuctionModel, dai_to_pay: &Amount) -> Result<()> {
        self.require_live()?;
        let net = self.net_debt();
        if net < *dai_to_pay {
            return Err(ProtocolError::InsufficientNetDebt {
                net: net.to_string(),
                requested: dai_to_pay.to_string(),
            });
        }
        if dai_to_pay.is_zero() {
            return Ok(());
        }
        let mkr_received = model
            .resolve_reverse(dai_to_pay, &TokenSymbol::dai(), &TokenSymbol::mkr(), None, &*self)
            .ok_or(ProtocolError::AuctionFailed)?;
        self.mint_mkr(KEEPERS_ACCOUNT, &mkr_received);
        self.vow_apply(VowCause::DebtAuction, dai_to_pay.to_signed());
        self.burn_dai_funded(DaiCause::DebtAuctionPayment, KEEPERS_ACCOUNT, dai_to_pay);
        Ok(())
    }

    /// Sells `dai_auctioned` of net surplus in a direct auction; the MKR paid
    /// by the winning keeper is burnt and the DAI goes to the keeper.
    pub fn run_surplus_auction(
        &mut self,
        model: &dyn AuctionModel,
        dai_auctioned: &Amount,
    ) -> Result<()> {
        self.require_live()?;
        let net = self.net_surplus();
        if net < *dai_auctioned {
            return Err(ProtocolError::InsufficientNetSurplus {
                net: net.to_string(),
                requested: dai_auctioned.to_string(),
            });
        }
        if dai_auctioned.is_zero() {
            return Ok(());
        }
        let mkr_offered = model
            .resolve_direct(dai_auctioned, &TokenSymbol::dai(), &TokenSymbol::mkr(), &*self)
            .ok_or(ProtocolError::AuctionFailed)?;
        let held = self.mkr.balance(KEEPERS_ACCOUNT);
        if held < mkr_offered {
            return Err(ProtocolError::InsufficientKeeperMkr {
                held: held.to_string(),
                required: mkr_offered.to_string(),
            });
        }
        self.burn_mkr_exact(KEEPERS_ACCOUNT, &mkr_offered);
        self.vow_apply(VowCause::SurplusAuction, -&dai_auctioned.to_signed());
        self.mint_dai(DaiCause::SurplusPayout, KEEPERS_ACCOUNT, dai_auctioned);
        Ok(())
    }

    /// Nets debt against surplus and auctions whatever exceeds the
    /// governance buffer thresholds.
    pub fn heal(
        &mut self,
        model: &dyn AuctionModel,
        debt_threshold: &Amount,
        surplus_threshold: &Amount,
    ) -> Result<()> {
        let net_debt = self.net_debt();
        if net_debt > *debt_threshold {
            let excess = &net_debt - debt_threshold;
            return self.run_debt_auction(model, &excess);
        }
        let net_surplus = self.net_surplus();
        if net_surplus > *surplus_threshold {
            let excess = &net_surplus - surplus_threshold;
            return self.run_surplus_auction(model, &excess);
        }
        Ok(())
    }
}
