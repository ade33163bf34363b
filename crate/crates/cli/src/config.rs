//! Scenario configuration: the default system Parameters, TOML overrides via
//! `--config`, and inline `config` lines at the top of a scenario file.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use daisim_engine::amount::{amt, Amount};
use daisim_engine::auction::AuctionParams;
use daisim_engine::state::{VaultTypeParams, World};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(message.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuctionConfig {
    pub bid_fraction: Amount,
    pub keeper_margin: Amount,
    pub min_bid_increase: Amount,
    pub bid_duration: u64,
    pub auction_duration: u64,
}

impl Default for AuctionConfig {
    fn default() -> Self {
        AuctionConfig {
            bid_fraction: amt("1"),
            keeper_margin: amt("0"),
            min_bid_increase: amt("0"),
            bid_duration: 0,
            auction_duration: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaultTypeConfig {
    pub id: String,
    pub collateral: String,
    pub stability_fee_rate: Amount,
    pub liquidation_ratio: Amount,
    pub liquidation_penalty: Amount,
    pub debt_floor: Amount,
    pub debt_ceiling: Amount,
}

/// Full system configuration consumed by `init`. The defaults reproduce the
/// reference setup: ETH at 150 with ETH-A (150%) and ETH-B (130%) vault
/// types, target price 1, and 1000 MKR issued to "holders".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub target_price: Amount,
    pub dai_savings_rate: Amount,
    pub global_debt_ceiling: Amount,
    pub osm_delay: u32,
    pub mkr_issuance: Amount,
    pub mkr_account: String,
    pub keeper_mkr: Amount,
    pub prices: BTreeMap<String, Amount>,
    pub whitelist: BTreeMap<String, Vec<String>>,
    pub auction: AuctionConfig,
    pub vault_types: Vec<VaultTypeConfig>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let mut prices = BTreeMap::new();
        prices.insert("ETH".to_string(), amt("150"));
        prices.insert("MKR".to_string(), amt("10"));
        ScenarioConfig {
            target_price: amt("1"),
            dai_savings_rate: amt("1"),
            global_debt_ceiling: amt("50000"),
            osm_delay: 0,
            mkr_issuance: amt("1000"),
            mkr_account: "holders".to_string(),
            keeper_mkr: amt("0"),
            prices,
            whitelist: BTreeMap::new(),
            auction: AuctionConfig::default(),
            vault_types: vec![
                VaultTypeConfig {
                    id: "ETH-A".to_string(),
                    collateral: "ETH".to_string(),
                    stability_fee_rate: amt("1"),
                    liquidation_ratio: amt("150"),
                    liquidation_penalty: amt("13"),
                    debt_floor: amt("20"),
                    debt_ceiling: amt("10000"),
                },
                VaultTypeConfig {
                    id: "ETH-B".to_string(),
                    collateral: "ETH".to_string(),
                    stability_fee_rate: amt("2"),
                    liquidation_ratio: amt("130"),
                    liquidation_penalty: amt("13"),
                    debt_floor: amt("20"),
                    debt_ceiling: amt("10000"),
                },
            ],
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    /// Applies one inline `config` line. The first token names the key, the
    /// rest are its arguments.
    pub fn apply_line(&mut self, args: &[&str]) -> Result<(), ConfigError> {
        let parse = |s: &str| -> Result<Amount, ConfigError> {
            s.parse().map_err(|e| invalid(format!("{e}")))
        };
        match args {
            ["target-price", v] => self.target_price = parse(v)?,
            ["dsr", v] | ["dai-savings-rate", v] => self.dai_savings_rate = parse(v)?,
            ["global-ceiling", v] | ["global-debt-ceiling", v] => {
                self.global_debt_ceiling = parse(v)?
            }
            ["osm-delay", v] => {
                self.osm_delay = v.parse().map_err(|_| invalid("osm-delay takes an integer"))?
            }
            ["mkr-issuance", v] => self.mkr_issuance = parse(v)?,
            ["mkr-account", v] => self.mkr_account = v.to_string(),
            ["keeper-mkr", v] => self.keeper_mkr = parse(v)?,
            ["price", token, v] => {
                self.prices.insert(token.to_string(), parse(v)?);
            }
            ["whitelist", token, sources] => {
                self.whitelist.insert(
                    token.to_string(),
                    sources.split(',').map(str::to_string).collect(),
                );
            }
            ["auction", "bid-fraction", v] => self.auction.bid_fraction = parse(v)?,
            ["auction", "keeper-margin", v] => self.auction.keeper_margin = parse(v)?,
            ["auction", "min-bid-increase", v] => self.auction.min_bid_increase = parse(v)?,
            ["auction", "bid-duration", v] => {
                self.auction.bid_duration =
                    v.parse().map_err(|_| invalid("bid-duration takes an integer"))?
            }
            ["auction", "auction-duration", v] => {
                self.auction.auction_duration =
                    v.parse().map_err(|_| invalid("auction-duration takes an integer"))?
            }
            ["vault-type", id, collateral, fee, ratio, penalty, floor, ceiling] => {
                let entry = VaultTypeConfig {
                    id: id.to_string(),
                    collateral: collateral.to_string(),
                    stability_fee_rate: parse(fee)?,
                    liquidation_ratio: parse(ratio)?,
                    liquidation_penalty: parse(penalty)?,
                    debt_floor: parse(floor)?,
                    debt_ceiling: parse(ceiling)?,
                };
                self.vault_types.retain(|t| t.id != entry.id);
                self.vault_types.push(entry);
            }
            _ => return Err(invalid(format!("unrecognized config line: {}", args.join(" ")))),
        }
        Ok(())
    }

    pub fn auction_params(&self) -> AuctionParams {
        AuctionParams {
            bid_fraction: self.auction.bid_fraction.clone(),
            keeper_margin: self.auction.keeper_margin.clone(),
            min_bid_increase: self.auction.min_bid_increase.clone(),
            bid_duration: self.auction.bid_duration,
            auction_duration: self.auction.auction_duration,
        }
    }
}

/// Builds the initial world from a configuration.
pub fn initialize_system(config: &ScenarioConfig) -> Result<World, ConfigError> {
    let mut world = World::new();
    if config.vault_types.is_empty() {
        return Err(invalid("at least one vault type is required"));
    }
    for vt in &config.vault_types {
        if vt.collateral.is_empty() || vt.id.is_empty() {
            return Err(invalid("vault type id and collateral must be non-empty"));
        }
        world
            .install_vault_type(
                &vt.id,
                VaultTypeParams {
                    collateral: vt.collateral.as_str().into(),
                    stability_fee_rate: vt.stability_fee_rate.clone(),
                    liquidation_ratio: vt.liquidation_ratio.clone(),
                    liquidation_penalty: vt.liquidation_penalty.clone(),
                    debt_floor: vt.debt_floor.clone(),
                    debt_ceiling: vt.debt_ceiling.clone(),
                },
            )
            .map_err(|e| invalid(format!("vault type {}: {e}", vt.id)))?;
    }
    world.set_global_debt_ceiling_raw(config.global_debt_ceiling.clone());
    world.set_target_price_raw(config.target_price.clone());
    world.set_dai_savings_rate_raw(config.dai_savings_rate.clone());
    world.set_auction_params(config.auction_params());
    for (token, sources) in &config.whitelist {
        if token.is_empty() {
            return Err(invalid("whitelist token must be non-empty"));
        }
        world.install_feed(
            token.as_str().into(),
            sources.iter().cloned().collect(),
            config.osm_delay,
        );
    }
    // every priced or whitelisted token gets the configured delay
    for (token, price) in &config.prices {
        if token.is_empty() {
            return Err(invalid("price token must be non-empty"));
        }
        if !config.whitelist.contains_key(token) {
            world.install_feed(token.as_str().into(), Default::default(), config.osm_delay);
        }
        world
            .set_price(&token.as_str().into(), price.clone())
            .map_err(|e| invalid(format!("price {token}: {e}")))?;
    }
    world.issue_mkr(&config.mkr_account, &config.mkr_issuance);
    if !config.keeper_mkr.is_zero() {
        world.issue_mkr(daisim_engine::KEEPERS_ACCOUNT, &config.keeper_mkr);
    }
    Ok(world)
}
