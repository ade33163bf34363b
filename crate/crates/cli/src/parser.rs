//! Line-oriented scenario DSL. One command per line, `#` starts a comment,
//! amounts are exact decimal (or `p/q`) literals. Every line parses to
//! exactly one command or to a parse error naming the line.

use std::fmt;

use daisim_engine::amount::{Amount, SignedAmount};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn holds(&self, lhs: &SignedAmount, rhs: &SignedAmount) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        })
    }
}

/// Read-only state queries usable on the left side of `assert`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Vow,
    NetDebt,
    NetSurplus,
    MkrSupply,
    DaiSupply,
    Price(String),
    VaultDebt(String),
    VaultCollateral(String),
    CollateralRatio(String),
    Pot(String),
    Dai(String),
    Mkr(String),
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Vow => write!(f, "vow"),
            Query::NetDebt => write!(f, "net-debt"),
            Query::NetSurplus => write!(f, "net-surplus"),
            Query::MkrSupply => write!(f, "mkr-supply"),
            Query::DaiSupply => write!(f, "dai-supply"),
            Query::Price(t) => write!(f, "price {t}"),
            Query::VaultDebt(v) => write!(f, "vault-debt {v}"),
            Query::VaultCollateral(v) => write!(f, "vault-collateral {v}"),
            Query::CollateralRatio(v) => write!(f, "cr {v}"),
            Query::Pot(a) => write!(f, "pot {a}"),
            Query::Dai(a) => write!(f, "dai {a}"),
            Query::Mkr(a) => write!(f, "mkr {a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertExpr {
    pub query: Query,
    pub cmp: Cmp,
    pub value: SignedAmount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Config(Vec<String>),
    Init,
    SetPrice { token: String, price: Amount },
    Quote { token: String, source: String, price: Amount },
    Poke { token: String },
    TickOsm,
    VaultCreate {
        vault_id: Option<String>,
        owner: String,
        collateral: Amount,
        asset: String,
        vault_type: String,
        debt: Amount,
    },
    Deposit { vault_id: String, amount: Amount },
    Withdraw { vault_id: String, amount: Amount },
    Generate { vault_id: String, amount: Amount },
    Repay { vault_id: String, amount: Amount },
    AccrueFees { vault_id: String },
    PotDeposit { address: String, amount: Amount },
    PotWithdraw { address: String, amount: Amount },
    /// `None` accrues every pot account.
    AccrueDsr { address: Option<String> },
    Liquidate { vault_id: String },
    Heal { debt_threshold: Amount, surplus_threshold: Amount },
    DebtAuction { amount: Amount },
    SurplusAuction { amount: Amount },
    SetParam { name: String, scope: Option<String>, value: Amount },
    EsmLock { account: String, amount: Amount },
    Shutdown,
    EndCooldown,
    Redeem { holder: String, amount: Amount },
    Assert(AssertExpr),
    Snapshot { path: Option<String> },
    ExpectError { error: String, inner: Box<ScenarioCommand> },
    Note { text: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioCommand {
    pub line: usize,
    pub verb: String,
    pub command: Command,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn parse_amount(line: usize, token: &str) -> Result<Amount, ParseError> {
    token.parse().map_err(|e| err(line, format!("{e}")))
}

fn parse_signed(line: usize, token: &str) -> Result<SignedAmount, ParseError> {
    token.parse().map_err(|e| err(line, format!("{e}")))
}

fn parse_query(line: usize, tokens: &[&str]) -> Result<(Query, usize), ParseError> {
    let query = match tokens {
        ["vow", ..] => return Ok((Query::Vow, 1)),
        ["net-debt", ..] => return Ok((Query::NetDebt, 1)),
        ["net-surplus", ..] => return Ok((Query::NetSurplus, 1)),
        ["mkr-supply", ..] => return Ok((Query::MkrSupply, 1)),
        ["dai-supply", ..] => return Ok((Query::DaiSupply, 1)),
        ["price", arg, ..] => (Query::Price(arg.to_string()), 2),
        ["vault-debt", arg, ..] => (Query::VaultDebt(arg.to_string()), 2),
        ["vault-collateral", arg, ..] => (Query::VaultCollateral(arg.to_string()), 2),
        ["cr", arg, ..] => (Query::CollateralRatio(arg.to_string()), 2),
        ["pot", arg, ..] => (Query::Pot(arg.to_string()), 2),
        ["dai", arg, ..] => (Query::Dai(arg.to_string()), 2),
        ["mkr", arg, ..] => (Query::Mkr(arg.to_string()), 2),
        [other, ..] => return Err(err(line, format!("unknown query {other:?}"))),
        [] => return Err(err(line, "assert needs a query")),
    };
    Ok(query)
}

fn parse_cmp(line: usize, token: &str) -> Result<Cmp, ParseError> {
    Ok(match token {
        "<" => Cmp::Lt,
        "<=" => Cmp::Le,
        "=" | "==" => Cmp::Eq,
        ">=" => Cmp::Ge,
        ">" => Cmp::Gt,
        other => return Err(err(line, format!("unknown comparison {other:?}"))),
    })
}

fn parse_tokens(line: usize, tokens: &[&str]) -> Result<ScenarioCommand, ParseError> {
    let verb = tokens[0];
    let arity = |expected: usize| -> Result<(), ParseError> {
        if tokens.len() - 1 == expected {
            Ok(())
        } else {
            Err(err(
                line,
                format!("{verb} takes {expected} argument(s), got {}", tokens.len() - 1),
            ))
        }
    };
    let command = match verb {
        "config" => {
            if tokens.len() < 2 {
                return Err(err(line, "config needs a key"));
            }
            Command::Config(tokens[1..].iter().map(|s| s.to_string()).collect())
        }
        "init" => {
            arity(0)?;
            Command::Init
        }
        "set-price" => {
            arity(2)?;
            Command::SetPrice {
                token: tokens[1].to_string(),
                price: parse_amount(line, tokens[2])?,
            }
        }
        "quote" => {
            arity(3)?;
            Command::Quote {
                token: tokens[1].to_string(),
                source: tokens[2].to_string(),
                price: parse_amount(line, tokens[3])?,
            }
        }
        "poke" => {
            arity(1)?;
            Command::Poke {
                token: tokens[1].to_string(),
            }
        }
        "tick-osm" => {
            arity(0)?;
            Command::TickOsm
        }
        "vault-create" => {
            arity(6)?;
            Command::VaultCreate {
                vault_id: match tokens[1] {
                    "_" => None,
                    id => Some(id.to_string()),
                },
                owner: tokens[2].to_string(),
                collateral: parse_amount(line, tokens[3])?,
                asset: tokens[4].to_string(),
                vault_type: tokens[5].to_string(),
                debt: parse_amount(line, tokens[6])?,
            }
        }
        "deposit" => {
            arity(2)?;
            Command::Deposit {
                vault_id: tokens[1].to_string(),
                amount: parse_amount(line, tokens[2])?,
            }
        }
        "withdraw" => {
            arity(2)?;
            Command::Withdraw {
                vault_id: tokens[1].to_string(),
                amount: parse_amount(line, tokens[2])?,
            }
        }
        "generate" => {
            arity(2)?;
            Command::Generate {
                vault_id: tokens[1].to_string(),
                amount: parse_amount(line, tokens[2])?,
            }
        }
        "repay" => {
            arity(2)?;
            Command::Repay {
                vault_id: tokens[1].to_string(),
                amount: parse_amount(line, tokens[2])?,
            }
        }
        "accrue-fees" => {
            arity(1)?;
            Command::AccrueFees {
                vault_id: tokens[1].to_string(),
            }
        }
        "pot-deposit" => {
            arity(2)?;
            Command::PotDeposit {
                address: tokens[1].to_string(),
                amount: parse_amount(line, tokens[2])?,
            }
        }
        "pot-withdraw" => {
            arity(2)?;
            Command::PotWithdraw {
                address: tokens[1].to_string(),
                amount: parse_amount(line, tokens[2])?,
            }
        }
        "accrue-dsr" => {
            arity(1)?;
            Command::AccrueDsr {
                address: match tokens[1] {
                    "*" => None,
                    addr => Some(addr.to_string()),
                },
            }
        }
        "liquidate" => {
            arity(1)?;
            Command::Liquidate {
                vault_id: tokens[1].to_string(),
            }
        }
        "heal" => {
            arity(2)?;
            Command::Heal {
                debt_threshold: parse_amount(line, tokens[1])?,
                surplus_threshold: parse_amount(line, tokens[2])?,
            }
        }
        "debt-auction" => {
            arity(1)?;
            Command::DebtAuction {
                amount: parse_amount(line, tokens[1])?,
            }
        }
        "surplus-auction" => {
            arity(1)?;
            Command::SurplusAuction {
                amount: parse_amount(line, tokens[1])?,
            }
        }
        "set-param" => {
            arity(3)?;
            Command::SetParam {
                name: tokens[1].to_string(),
                scope: match tokens[2] {
                    "global" => None,
                    scope => Some(scope.to_string()),
                },
                value: parse_amount(line, tokens[3])?,
            }
        }
        "esm-lock" => {
            arity(2)?;
            Command::EsmLock {
                account: tokens[1].to_string(),
                amount: parse_amount(line, tokens[2])?,
            }
        }
        "shutdown" => {
            arity(0)?;
            Command::Shutdown
        }
        "end-cooldown" => {
            arity(0)?;
            Command::EndCooldown
        }
        "redeem" => {
            arity(2)?;
            Command::Redeem {
                holder: tokens[1].to_string(),
                amount: parse_amount(line, tokens[2])?,
            }
        }
        "assert" => {
            let rest = &tokens[1..];
            let (query, used) = parse_query(line, rest)?;
            if rest.len() != used + 2 {
                return Err(err(line, "assert takes: <query> <cmp> <value>"));
            }
            Command::Assert(AssertExpr {
                query,
                cmp: parse_cmp(line, rest[used])?,
                value: parse_signed(line, rest[used + 1])?,
            })
        }
        "snapshot" => match tokens.len() {
            1 => Command::Snapshot { path: None },
            2 => Command::Snapshot {
                path: Some(tokens[1].to_string()),
            },
            _ => return Err(err(line, "snapshot takes at most one path")),
        },
        "expect-error" => {
            if tokens.len() < 3 {
                return Err(err(line, "expect-error takes: <error-name> <command...>"));
            }
            let inner = parse_tokens(line, &tokens[2..])?;
            if matches!(
                inner.command,
                Command::ExpectError { .. } | Command::Config(_) | Command::Note { .. }
            ) {
                return Err(err(line, format!("expect-error cannot wrap {}", inner.verb)));
            }
            Command::ExpectError {
                error: tokens[1].to_string(),
                inner: Box::new(inner),
            }
        }
        "note" => Command::Note {
            text: tokens[1..].join(" "),
        },
        other => return Err(err(line, format!("unknown command {other:?}"))),
    };
    Ok(ScenarioCommand {
        line,
        verb: verb.to_string(),
        command,
    })
}

/// Parses a whole scenario file.
pub fn parse_scenario(text: &str) -> Result<Vec<ScenarioCommand>, ParseError> {
    let mut commands = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        commands.push(parse_tokens(line, &tokens)?);
    }
    Ok(commands)
}
