//! Pluggable keeper-bidding behavior.
//!
//! Direct auctions sell a fixed lot for the highest payment; reverse auctions
//! fix the payment and let bidders shrink the lot they accept. Concrete
//! bidding rules live behind [`AuctionModel`]; the engine ships a
//! deterministic break-even model in which competitive keepers bid exactly
//! the market value of what they receive.

use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::state::{TokenSymbol, World};

/// Where a model looks up market prices. DAI resolves to the target price.
pub trait PriceSource {
    fn price_of(&self, token: &TokenSymbol) -> Option<Amount>;
}

impl PriceSource for World {
    fn price_of(&self, token: &TokenSymbol) -> Option<Amount> {
        self.effective_price(token)
    }
}

impl PriceSource for std::collections::BTreeMap<TokenSymbol, Amount> {
    fn price_of(&self, token: &TokenSymbol) -> Option<Amount> {
        self.get(token).cloned()
    }
}

/// Auction risk parameters. The break-even model consumes `bid_fraction` and
/// `keeper_margin`; the remaining fields are carried as governance
/// configuration for round-based models and surfaced in snapshots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuctionParams {
    /// Fraction of market value a direct-auction winner bids (1 = break even).
    pub bid_fraction: Amount,
    /// Profit margin a reverse-auction winner demands, as a fraction in [0, 1).
    pub keeper_margin: Amount,
    /// Minimum bid increase in percent (round-based models only).
    pub min_bid_increase: Amount,
    /// Steps a standing bid remains open (round-based models only).
    pub bid_duration: u64,
    /// Steps before an auction expires (round-based models only).
    pub auction_duration: u64,
}

impl Default for AuctionParams {
    fn default() -> Self {
        AuctionParams {
            bid_fraction: Amount::from_int(1),
            keeper_margin: Amount::zero(),
            min_bid_increase: Amount::zero(),
            bid_duration: 0,
            auction_duration: 0,
        }
    }
}

/// Deterministic bidding rules: same inputs, same outcome. `None` means the
/// auction attracted no usable bid.
pub trait AuctionModel {
    /// Winning payment offered for the whole lot, in `payment_asset`.
    fn resolve_direct(
        &self,
        lot: &Amount,
        lot_asset: &TokenSymbol,
        payment_asset: &TokenSymbol,
        prices: &dyn PriceSource,
    ) -> Option<Amount>;

    /// Smallest lot a bidder accepts in exchange for the fixed payment,
    /// clamped to `lot_cap` when one exists.
    fn resolve_reverse(
        &self,
        fixed_payment: &Amount,
        payment_asset: &TokenSymbol,
        lot_asset: &TokenSymbol,
        lot_cap: Option<&Amount>,
        prices: &dyn PriceSource,
    ) -> Option<Amount>;
}

/// Competitive break-even keepers: the direct bid equals the lot's market
/// value scaled by `bid_fraction`; the reverse lot equals the payment's
/// market value grossed up by `keeper_margin`.
#[derive(Debug, Clone, Default)]
pub struct BreakEvenModel {
    pub params: AuctionParams,
}

impl BreakEvenModel {
    pub fn new(params: AuctionParams) -> Self {
        BreakEvenModel { params }
    }
}

impl AuctionModel for BreakEvenModel {
    fn resolve_direct(
        &self,
        lot: &Amount,
        lot_asset: &TokenSymbol,
        payment_asset: &TokenSymbol,
        prices: &dyn PriceSource,
    ) -> Option<Amount> {
        let lot_price = prices.price_of(lot_asset)?;
        let payment_price = prices.price_of(payment_asset)?;
        if payment_price.is_zero() {
            return None;
        }
        Some(&(&(lot * &lot_price) / &payment_price) * &self.params.bid_fraction)
    }

    fn resolve_reverse(
        &self,
        fixed_payment: &Amount,
        payment_asset: &TokenSymbol,
        lot_asset: &TokenSymbol,
        lot_cap: Option<&Amount>,
        prices: &dyn PriceSource,
    ) -> Option<Amount> {
        let payment_price = prices.price_of(payment_asset)?;
        let lot_price = prices.price_of(lot_asset)?;
        if lot_price.is_zero() {
            return None;
        }
        let one = Amount::from_int(1);
        // A margin of 1 or more leaves no acceptable lot.
        let discount = one.checked_sub(&self.params.keeper_margin)?;
        if discount.is_zero() {
            return None;
        }
        let accepted = &(fixed_payment * &payment_price) / &(&lot_price * &discount);
        Some(match lot_cap {
            Some(cap) => accepted.min(cap.clone()),
            None => accepted,
        })
    }
}
