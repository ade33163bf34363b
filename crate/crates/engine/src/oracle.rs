//! Price feeds: direct setting, median aggregation over whitelisted sources,
//! and delayed publication of the aggregated price.

use crate::amount::Amount;
use crate::error::{ProtocolError, Result};
use crate::state::{PendingPrice, SystemPhase, TokenSymbol, World};

/// Exact median: middle element, or the midpoint of the two central values
/// when the count is even.
pub fn median(values: &[Amount]) -> Option<Amount> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort();
    let n = sorted.len();
    if n % 2 == 1 {
        Some(sorted[n / 2].clone())
    } else {
        let pair = &sorted[n / 2 - 1] + &sorted[n / 2];
        Some(&pair / &Amount::from_int(2))
    }
}

impl World {
    /// Replaces the current price immediately, bypassing the delay buffer.
    pub fn set_price(&mut self, token: &TokenSymbol, price: Amount) -> Result<()> {
        self.require_live()?;
        if price.is_zero() {
            return Err(ProtocolError::NonPositivePrice(price.to_string()));
        }
        let feed = self.feeds.entry(token.clone()).or_default();
        feed.current_price = Some(price);
        Ok(())
    }

    pub fn current_price(&self, token: &TokenSymbol) -> Option<&Amount> {
        self.feeds.get(token).and_then(|f| f.current_price.as_ref())
    }

    /// Records a quote from a whitelisted source, superseding that source's
    /// previous quote.
    pub fn submit_quote(&mut self, token: &TokenSymbol, source: &str, price: Amount) -> Result<()> {
        if price.is_zero() {
            return Err(ProtocolError::NonPositivePrice(price.to_string()));
        }
        let feed = self
            .feeds
            .get_mut(token)
            .filter(|f| f.whitelisted_sources.contains(source))
            .ok_or_else(|| ProtocolError::UnlistedSource(source.to_string()))?;
        feed.submitted_quotes.insert(source.to_string(), price);
        Ok(())
    }

    /// Aggregates the submitted quotes into a median and stages it behind the
    /// feed's publication delay (applied immediately when the delay is zero).
    pub fn poke_median(&mut self, token: &TokenSymbol) -> Result<()> {
        self.require_live()?;
        let feed = self
            .feeds
            .get_mut(token)
            .filter(|f| !f.submitted_quotes.is_empty())
            .ok_or_else(|| ProtocolError::NoQuotes(token.to_string()))?;
        let quotes: Vec<Amount> = feed.submitted_quotes.values().cloned().collect();
        let median = median(&quotes).expect("non-empty quote set");
        if feed.osm_delay == 0 {
            feed.current_price = Some(median);
            feed.pending = None;
        } else {
            feed.pending = Some(PendingPrice {
                price: median,
                remaining_delay: feed.osm_delay,
            });
        }
        Ok(())
    }

    /// Advances the publication delay of every pending price by one step;
    /// prices reaching zero delay become current. Frozen systems ignore the
    /// tick entirely.
    pub fn advance_osm(&mut self) {
        if let SystemPhase::Shutdown(_) = self.phase {
            return;
        }
        for feed in self.feeds.values_mut() {
            if let Some(pending) = feed.pending.as_mut() {
                pending.remaining_delay = pending.remaining_delay.saturating_sub(1);
                if pending.remaining_delay == 0 {
                    feed.current_price = Some(pending.price.clone());
                    feed.pending = None;
                }
            }
        }
    }
}
