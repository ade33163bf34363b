//! Engine error type.
//!
//! Every guard in the protocol maps to one named variant. The stable
//! [`ProtocolError::name`] identifier is what scenario scripts match on with
//! `expect-error`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("vault {0:?} already exists")]
    DuplicateVault(String),
    #[error("unknown vault {0:?}")]
    UnknownVault(String),
    #[error("unknown vault type {0:?}")]
    UnknownVaultType(String),
    #[error("vault type {vault_type:?} takes {expected:?} collateral, got {got:?}")]
    CollateralTypeMismatch {
        vault_type: String,
        expected: String,
        got: String,
    },
    #[error("debt {debt} below floor {floor} for vault type {vault_type:?}")]
    BelowDebtFloor {
        vault_type: String,
        debt: String,
        floor: String,
    },
    #[error("debt ceiling exceeded for vault type {vault_type:?}: {total} > {ceiling}")]
    DebtCeilingExceeded {
        vault_type: String,
        total: String,
        ceiling: String,
    },
    #[error("global debt ceiling exceeded: {total} > {ceiling}")]
    GlobalCeilingExceeded { total: String, ceiling: String },
    #[error("collateralization ratio {ratio} below liquidation ratio {required}")]
    Undercollateralized { ratio: String, required: String },
    #[error("operation not allowed after emergency shutdown")]
    SystemShutdown,
    #[error("insufficient collateral: vault holds {held}, requested {requested}")]
    InsufficientCollateral { held: String, requested: String },
    #[error("repayment {amount} exceeds outstanding debt {debt}")]
    Overpayment { amount: String, debt: String },
    #[error("collateralization ratio undefined for zero debt")]
    ZeroDebt,
    #[error("no usable price for token {0:?}")]
    ZeroPrice(String),
    #[error("insufficient pot deposit: have {deposit}, requested {requested}")]
    InsufficientDeposit { deposit: String, requested: String },
    #[error("unknown savings account {0:?}")]
    UnknownAccount(String),
    #[error("vault {0:?} is not liquidatable")]
    NotLiquidatable(String),
    #[error("net debt {net} smaller than requested auction amount {requested}")]
    InsufficientNetDebt { net: String, requested: String },
    #[error("net surplus {net} smaller than requested auction amount {requested}")]
    InsufficientNetSurplus { net: String, requested: String },
    #[error("auction attracted no usable bid")]
    AuctionFailed,
    #[error("keeper account holds {held} MKR, auction requires {required}")]
    InsufficientKeeperMkr { held: String, required: String },
    #[error("unknown governance parameter {0:?}")]
    UnknownParameter(String),
    #[error("invalid value {value} for parameter {parameter:?}: {reason}")]
    InvalidValue {
        parameter: String,
        value: String,
        reason: String,
    },
    #[error("account {account:?} holds {held} MKR, requested {requested}")]
    InsufficientMkr {
        account: String,
        held: String,
        requested: String,
    },
    #[error("emergency shutdown requires a strict MKR majority locked in the esm account")]
    NoQuorum,
    #[error("system is already shut down")]
    AlreadyShutdown,
    #[error("operation requires completed shutdown (frozen system, cooldown ended)")]
    NotShutdown,
    #[error("holder owns {held} DAI, requested {requested}")]
    InsufficientDai { held: String, requested: String },
    #[error("price must be strictly positive, got {0}")]
    NonPositivePrice(String),
    #[error("source {0:?} is not whitelisted for this feed")]
    UnlistedSource(String),
    #[error("no quotes submitted for token {0:?}")]
    NoQuotes(String),
}

impl ProtocolError {
    /// Stable identifier used by scenario scripts and traces.
    pub fn name(&self) -> &'static str {
        use ProtocolError::*;
        match self {
            DuplicateVault(_) => "DuplicateVault",
            UnknownVault(_) => "UnknownVault",
            UnknownVaultType(_) => "UnknownVaultType",
            CollateralTypeMismatch { .. } => "CollateralTypeMismatch",
            BelowDebtFloor { .. } => "BelowDebtFloor",
            DebtCeilingExceeded { .. } => "DebtCeilingExceeded",
            GlobalCeilingExceeded { .. } => "GlobalCeilingExceeded",
            Undercollateralized { .. } => "Undercollateralized",
            SystemShutdown => "SystemShutdown",
            InsufficientCollateral { .. } => "InsufficientCollateral",
            Overpayment { .. } => "Overpayment",
            ZeroDebt => "ZeroDebt",
            ZeroPrice(_) => "ZeroPrice",
            InsufficientDeposit { .. } => "InsufficientDeposit",
            UnknownAccount(_) => "UnknownAccount",
            NotLiquidatable(_) => "NotLiquidatable",
            InsufficientNetDebt { .. } => "InsufficientNetDebt",
            InsufficientNetSurplus { .. } => "InsufficientNetSurplus",
            AuctionFailed => "AuctionFailed",
            InsufficientKeeperMkr { .. } => "InsufficientKeeperMkr",
            UnknownParameter(_) => "UnknownParameter",
            InvalidValue { .. } => "InvalidValue",
            InsufficientMkr { .. } => "InsufficientMkr",
            NoQuorum => "NoQuorum",
            AlreadyShutdown => "AlreadyShutdown",
            NotShutdown => "NotShutdown",
            InsufficientDai { .. } => "InsufficientDai",
            NonPositivePrice(_) => "NonPositivePrice",
            UnlistedSource(_) => "UnlistedSource",
            NoQuotes(_) => "NoQuotes",
        }
    }
}

pub type Result<T> = std::result::Result<T, ProtocolError>;
