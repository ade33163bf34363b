//! Shared unit-test worlds.

use crate::amount::amt;
use crate::state::{VaultTypeParams, World};

/// Two ETH vault types (150% / 130%), ETH at 150, MKR at 10, generous
/// ceilings, 1% savings rate, 1000 MKR issued to "holders".
pub(crate) fn basic_world() -> World {
    let mut w = World::new();
    w.install_vault_type(
        "ETH-A",
        VaultTypeParams {
            collateral: "ETH".into(),
            stability_fee_rate: amt("1"),
            liquidation_ratio: amt("150"),
            liquidation_penalty: amt("13"),
            debt_floor: amt("20"),
            debt_ceiling: amt("10000"),
        },
    )
    .unwrap();
    w.install_vault_type(
        "ETH-B",
        VaultTypeParams {
            collateral: "ETH".into(),
            stability_fee_rate: amt("2"),
            liquidation_ratio: amt("130"),
            liquidation_penalty: amt("13"),
            debt_floor: amt("20"),
            debt_ceiling: amt("10000"),
        },
    )
    .unwrap();
    w.set_global_debt_ceiling_raw(amt("50000"));
    w.set_price(&"ETH".into(), amt("150")).unwrap();
    w.set_price(&"MKR".into(), amt("10")).unwrap();
    w.set_dai_savings_rate_raw(amt("1"));
    w.issue_mkr("holders", &amt("1000"));
    w
}
