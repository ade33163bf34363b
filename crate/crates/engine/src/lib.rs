//! Deterministic, exact-arithmetic engine for the DAI stablecoin protocol:
//! vaults, stability fees, the savings pot, liquidations, the three auction
//! kinds, governance parameters, price feeds and emergency shutdown.
//!
//! All quantities are exact rationals; identical inputs always produce
//! identical state, byte for byte, through [`snapshot`].

pub mod accounting;
pub mod amount;
pub mod auction;
pub mod error;
pub mod governance;
pub mod liquidation;
pub mod oracle;
pub mod pot;
pub mod snapshot;
pub mod state;
pub mod vault;
pub mod vow;

#[cfg(test)]
pub(crate) mod fixtures;

pub use accounting::{check_accounting, AccountingReport, Violation};
pub use amount::{amt, signed, Amount, SignedAmount};
pub use auction::{AuctionModel, AuctionParams, BreakEvenModel, PriceSource};
pub use error::{ProtocolError, Result};
pub use governance::{ShutdownReport, ESM_ACCOUNT, PARAMETER_NAMES};
pub use liquidation::{collateral_auction, CollateralAuctionOutcome, LiquidationReport};
pub use state::{
    DaiCause, DebtCounters, FeedState, JournalEntry, MkrLedger, PendingPrice, ShutdownState,
    SystemPhase, TokenSymbol, VaultRecord, VaultTypeParams, VowCause, World,
};
pub use vault::collateralization_ratio;
pub use vow::KEEPERS_ACCOUNT;
