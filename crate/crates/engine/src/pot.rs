//! The savings container: DAI deposits earning the DAI savings rate, funded
//! from the vow.

use crate::amount::Amount;
use crate::error::{ProtocolError, Result};
use crate::state::{DaiCause, VowCause, World};

impl World {
    /// Moves DAI from an account's holdings into its pot deposit. Total
    /// supply is unchanged (short holdings are externally funded and
    /// journaled).
    pub fn pot_deposit_dai(&mut self, address: &str, amount: &Amount) -> Result<()> {
        self.require_live()?;
        let held = self.dai_balance(address);
        if let Some(shortfall) = amount.checked_sub(&held) {
            if !shortfall.is_zero() {
                self.mint_dai(DaiCause::ExternalFunding, address, &shortfall);
            }
        }
        if !amount.is_zero() {
            let held = self
                .dai_holdings
                .get_mut(address)
                .expect("funded above");
            *held -= amount;
        }
        *self
            .pot
            .entry(address.to_string())
            .or_insert_with(Amount::zero) += amount;
        Ok(())
    }

    /// Moves DAI back from the pot into the account's holdings. Allowed after
    /// shutdown so depositors can redeem.
    pub fn pot_withdraw_dai(&mut self, address: &str, amount: &Amount) -> Result<()> {
        let deposit = self
            .pot
            .get(address)
            .ok_or_else(|| ProtocolError::UnknownAccount(address.to_string()))?;
        let remaining = deposit
            .checked_sub(amount)
            .ok_or_else(|| ProtocolError::InsufficientDeposit {
                deposit: deposit.to_string(),
                requested: amount.to_string(),
            })?;
        self.pot.insert(address.to_string(), remaining);
        if !amount.is_zero() {
            *self
                .dai_holdings
                .entry(address.to_string())
                .or_insert_with(Amount::zero) += amount;
        }
        Ok(())
    }

    /// Credits one savings-rate step to the account: interest is newly minted
    /// DAI, and the vow pays for it. Returns the interest credited.
    pub fn accrue_savings(&mut self, address: &str) -> Result<Amount> {
        self.require_live()?;
        let deposit = self
            .pot
            .get(address)
            .ok_or_else(|| ProtocolError::UnknownAccount(address.to_string()))?;
        let interest = deposit.percent(&self.dai_savings_rate);
        if interest.is_zero() {
            return Ok(interest);
        }
        self.mint_dai_into_pot(address, &interest);
        self.vow_apply(VowCause::SavingsInterest, -&interest.to_signed());
        Ok(interest)
    }

    /// Convenience: one savings step for every pot account, in address order.
    pub fn accrue_savings_all(&mut self) -> Result<()> {
        let addresses: Vec<String> = self.pot.keys().cloned().collect();
        for address in addresses {
            self.accrue_savings(&address)?;
        }
        Ok(())
    }
}
