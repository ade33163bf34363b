//! Exact rational quantities.
//!
//! Every balance, price, rate and ratio in the engine is an exact rational
//! number. No operation rounds; decimal rendering happens only at
//! serialization time. [`Amount`] is non-negative (token quantities, debts,
//! prices), [`SignedAmount`] is signed and exists for the vow balance and for
//! deltas.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// Longest decimal expansion rendered before falling back to `p/q` form.
const MAX_DECIMAL_DIGITS: u32 = 18;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid amount literal {literal:?}: {reason}")]
pub struct ParseAmountError {
    pub literal: String,
    pub reason: String,
}

fn parse_err(literal: &str, reason: &str) -> ParseAmountError {
    ParseAmountError {
        literal: literal.to_string(),
        reason: reason.to_string(),
    }
}

/// Parses an exact rational from `"123"`, `"-1.5"` or `"p/q"` notation.
fn parse_rational(s: &str) -> Result<BigRational, ParseAmountError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(parse_err(s, "empty string"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let p = BigInt::from_str(num.trim()).map_err(|e| parse_err(s, &e.to_string()))?;
        let q = BigInt::from_str(den.trim()).map_err(|e| parse_err(s, &e.to_string()))?;
        if q.is_zero() {
            return Err(parse_err(s, "zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(parse_err(s, "no digits"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(parse_err(s, "non-digit character"));
    }
    let int_part = if int_part.is_empty() { "0" } else { int_part };
    let mut numer = BigInt::from_str(int_part).map_err(|e| parse_err(s, &e.to_string()))?;
    let mut denom = BigInt::one();
    if !frac_part.is_empty() {
        let frac = BigInt::from_str(frac_part).map_err(|e| parse_err(s, &e.to_string()))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        numer = numer * &scale + frac;
        denom = scale;
    }
    if sign < 0 {
        numer = -numer;
    }
    Ok(BigRational::new(numer, denom))
}

/// Renders a reduced rational as a decimal when the expansion terminates
/// within [`MAX_DECIMAL_DIGITS`] digits, otherwise as `p/q`.
fn render_rational(r: &BigRational, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_negative() {
        write!(out, "-")?;
    }
    let numer = r.numer().abs();
    let denom = r.denom().clone();
    if denom.is_one() {
        return write!(out, "{numer}");
    }
    // Factor the denominator as 2^a * 5^b * rest.
    let mut rest = denom.clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&rest % &two).is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    let scale = twos.max(fives);
    if !rest.is_one() || scale > MAX_DECIMAL_DIGITS {
        return write!(out, "{numer}/{denom}");
    }
    let scaled = numer * BigInt::from(10u32).pow(scale) / denom;
    let digits = scaled.to_string();
    let point = scale as usize;
    if digits.len() > point {
        let (int_part, frac_part) = digits.split_at(digits.len() - point);
        write!(out, "{int_part}.{frac_part}")
    } else {
        write!(out, "0.{}{}", "0".repeat(point - digits.len()), digits)
    }
}

/// A non-negative exact rational quantity of a token, debt or rate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Hash)]
pub struct Amount(BigRational);

impl Amount {
    pub fn zero() -> Self {
        Amount(BigRational::zero())
    }

    pub fn from_int(n: u64) -> Self {
        Amount(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`, panics if den is zero or the ratio is negative.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        assert!(!r.is_negative(), "Amount::from_ratio produced a negative value");
        Amount(r)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn checked_sub(&self, rhs: &Amount) -> Option<Amount> {
        if self.0 >= rhs.0 {
            Some(Amount(&self.0 - &rhs.0))
        } else {
            None
        }
    }

    /// `self * rate / 100`; the interest formula shared by fees, savings and
    /// penalties.
    pub fn percent(&self, rate: &Amount) -> Amount {
        Amount(&self.0 * &rate.0 / BigRational::from_integer(BigInt::from(100u32)))
    }

    pub fn min(self, other: Amount) -> Amount {
        if self.0 <= other.0 {
            self
        } else {
            other
        }
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_signed(&self) -> SignedAmount {
        SignedAmount(self.0.clone())
    }
}

impl TryFrom<BigRational> for Amount {
    type Error = ParseAmountError;

    fn try_from(r: BigRational) -> Result<Self, Self::Error> {
        if r.is_negative() {
            Err(parse_err(&r.to_string(), "negative amount"))
        } else {
            Ok(Amount(r))
        }
    }
}

impl FromStr for Amount {
    type Err = ParseAmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let r = parse_rational(s)?;
        if r.is_negative() {
            return Err(parse_err(s, "negative amount"));
        }
        Ok(Amount(r))
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render_rational(&self.0, f)
    }
}

impl Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Amount) -> Amount {
        Amount(self.0 + rhs.0)
    }
}

impl Add for &Amount {
    type Output = Amount;
    fn add(self, rhs: &Amount) -> Amount {
        Amount(&self.0 + &rhs.0)
    }
}

impl AddAssign<&Amount> for Amount {
    fn add_assign(&mut self, rhs: &Amount) {
        self.0 += &rhs.0;
    }
}

impl Sub for &Amount {
    type Output = Amount;
    /// Panics on underflow; guard with [`Amount::checked_sub`] on fallible paths.
    fn sub(self, rhs: &Amount) -> Amount {
        self.checked_sub(rhs).expect("Amount subtraction underflow")
    }
}

impl SubAssign<&Amount> for Amount {
    fn sub_assign(&mut self, rhs: &Amount) {
        *self = (&*self) - rhs;
    }
}

impl Mul for &Amount {
    type Output = Amount;
    fn mul(self, rhs: &Amount) -> Amount {
        Amount(&self.0 * &rhs.0)
    }
}

impl Div for &Amount {
    type Output = Amount;
    fn div(self, rhs: &Amount) -> Amount {
        assert!(!rhs.is_zero(), "Amount division by zero");
        Amount(&self.0 / &rhs.0)
    }
}

impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// A signed exact rational; positive means surplus, negative means unbacked debt.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct SignedAmount(BigRational);

impl SignedAmount {
    pub fn zero() -> Self {
        SignedAmount(BigRational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        SignedAmount(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// max(0, self) as an unsigned amount.
    pub fn positive_part(&self) -> Amount {
        if self.0.is_positive() {
            Amount(self.0.clone())
        } else {
            Amount::zero()
        }
    }

    /// max(0, -self) as an unsigned amount.
    pub fn negative_part(&self) -> Amount {
        if self.0.is_negative() {
            Amount(-&self.0)
        } else {
            Amount::zero()
        }
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for SignedAmount {
    fn from(r: BigRational) -> Self {
        SignedAmount(r)
    }
}

impl FromStr for SignedAmount {
    type Err = ParseAmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(SignedAmount(parse_rational(s)?))
    }
}

impl fmt::Display for SignedAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render_rational(&self.0, f)
    }
}

impl Add for &SignedAmount {
    type Output = SignedAmount;
    fn add(self, rhs: &SignedAmount) -> SignedAmount {
        SignedAmount(&self.0 + &rhs.0)
    }
}

impl Sub for &SignedAmount {
    type Output = SignedAmount;
    fn sub(self, rhs: &SignedAmount) -> SignedAmount {
        SignedAmount(&self.0 - &rhs.0)
    }
}

impl Neg for &SignedAmount {
    type Output = SignedAmount;
    fn neg(self) -> SignedAmount {
        SignedAmount(-&self.0)
    }
}

impl PartialEq<Amount> for SignedAmount {
    fn eq(&self, other: &Amount) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd<Amount> for SignedAmount {
    fn partial_cmp(&self, other: &Amount) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Serialize for SignedAmount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignedAmount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Parses an [`Amount`] literal; panics on malformed input. Test and
/// initialization convenience.
pub fn amt(s: &str) -> Amount {
    s.parse().unwrap_or_else(|e| panic!("{e}"))
}

/// Parses a [`SignedAmount`] literal; panics on malformed input.
pub fn signed(s: &str) -> SignedAmount {
    s.parse().unwrap_or_else(|e| panic!("{e}"))
}
