//! Unbounded non-negative integers and their decimal-digit views.
//!
//! The canonical decimal string (no sign, no separators, no leading zeros
//! except the single digit `"0"`) is the byte substrate hashed by the shard
//! writer, so [`ExactInt`]'s `Display` and `FromStr` must stay bit-stable.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Token id reserved for padding in the downstream digit vocabulary.
pub const PAD_TOKEN: u32 = 0;
/// Token id reserved for a sign; no negative numbers are ever emitted.
pub const SIGN_TOKEN: u32 = 11;
/// Vocabulary size: PAD, ten digits, sign.
pub const VOCAB_SIZE: u32 = 12;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactInt(BigUint);

impl ExactInt {
    pub fn zero() -> Self {
        ExactInt(BigUint::zero())
    }

    pub fn one() -> Self {
        ExactInt(BigUint::one())
    }

    /// `10^k`.
    pub fn pow10(k: u32) -> Self {
        ExactInt(BigUint::from(10u32).pow(k))
    }

    /// `2^k`.
    pub fn pow2(k: u64) -> Self {
        ExactInt(BigUint::one() << k)
    }

    /// Parses a canonical decimal string. Signs, whitespace, separators and
    /// leading zeros are all rejected.
    pub fn from_decimal(s: &str) -> Result<Self> {
        check_canonical(s)?;
        // check_canonical guarantees ASCII digits only
        Ok(ExactInt(
            BigUint::parse_bytes(s.as_bytes(), 10).expect("validated decimal"),
        ))
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn into_biguint(self) -> BigUint {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_odd(&self) -> bool {
        self.0.is_odd()
    }

    /// Number of significant bits; zero has bit length 0.
    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    /// Number of decimal digits of the canonical string.
    pub fn digit_count(&self) -> usize {
        self.to_string().len()
    }

    pub fn square(&self) -> Self {
        ExactInt(&self.0 * &self.0)
    }

    pub fn checked_sub(&self, rhs: &ExactInt) -> Option<ExactInt> {
        if rhs.0 > self.0 {
            None
        } else {
            Some(ExactInt(&self.0 - &rhs.0))
        }
    }

    pub fn abs_diff(&self, rhs: &ExactInt) -> ExactInt {
        if self.0 >= rhs.0 {
            ExactInt(&self.0 - &rhs.0)
        } else {
            ExactInt(&rhs.0 - &self.0)
        }
    }

    pub fn rem_u64(&self, modulus: u64) -> u64 {
        (&self.0 % modulus)
            .to_u64()
            .expect("remainder below u64 modulus")
    }

    pub fn div_rem(&self, divisor: &ExactInt) -> (ExactInt, ExactInt) {
        let (q, r) = self.0.div_rem(&divisor.0);
        (ExactInt(q), ExactInt(r))
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn is_palindrome(&self) -> bool {
        let s = self.to_string();
        s.bytes().eq(s.bytes().rev())
    }
}

fn check_canonical(s: &str) -> Result<()> {
    let malformed = |reason| {
        Err(Error::Malformed {
            input: s.chars().take(64).collect(),
            reason,
        })
    };
    if s.is_empty() {
        return malformed("empty string");
    }
    if !s.bytes().all(|b| b.is_ascii_digit()) {
        return malformed("non-digit character");
    }
    if s.len() > 1 && s.starts_with('0') {
        return malformed("leading zero");
    }
    Ok(())
}

impl fmt::Display for ExactInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl FromStr for ExactInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExactInt::from_decimal(s)
    }
}

impl From<u64> for ExactInt {
    fn from(v: u64) -> Self {
        ExactInt(BigUint::from(v))
    }
}

impl From<u32> for ExactInt {
    fn from(v: u32) -> Self {
        ExactInt(BigUint::from(v))
    }
}

impl From<u128> for ExactInt {
    fn from(v: u128) -> Self {
        ExactInt(BigUint::from(v))
    }
}

impl From<BigUint> for ExactInt {
    fn from(v: BigUint) -> Self {
        ExactInt(v)
    }
}

impl<'a> Add<&'a ExactInt> for &'a ExactInt {
    type Output = ExactInt;
    fn add(self, rhs: &ExactInt) -> ExactInt {
        ExactInt(&self.0 + &rhs.0)
    }
}

impl Add<u64> for &ExactInt {
    type Output = ExactInt;
    fn add(self, rhs: u64) -> ExactInt {
        ExactInt(&self.0 + rhs)
    }
}

impl Add for ExactInt {
    type Output = ExactInt;
    fn add(self, rhs: ExactInt) -> ExactInt {
        ExactInt(self.0 + rhs.0)
    }
}

impl<'a> Mul<&'a ExactInt> for &'a ExactInt {
    type Output = ExactInt;
    fn mul(self, rhs: &ExactInt) -> ExactInt {
        ExactInt(&self.0 * &rhs.0)
    }
}

impl Mul<u64> for &ExactInt {
    type Output = ExactInt;
    fn mul(self, rhs: u64) -> ExactInt {
        ExactInt(&self.0 * rhs)
    }
}

impl Mul for ExactInt {
    type Output = ExactInt;
    fn mul(self, rhs: ExactInt) -> ExactInt {
        ExactInt(self.0 * rhs.0)
    }
}

impl Serialize for ExactInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ExactInt::from_decimal(&s).map_err(serde::de::Error::custom)
    }
}

/// Decimal digits, least-significant first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitSeq(Vec<u8>);

impl DigitSeq {
    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; a digit sequence holds at least one digit.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Positional reconstruction `sum(tokens[i] * 10^i)`.
    pub fn to_exact(&self) -> ExactInt {
        let mut acc = BigUint::zero();
        for &d in self.0.iter().rev() {
            acc = acc * 10u32 + u32::from(d);
        }
        ExactInt(acc)
    }

    /// Model token ids (digit `d` maps to `d + 1`, [`PAD_TOKEN`] fills the
    /// tail). Refuses sequences longer than `max_len` instead of clipping.
    pub fn token_ids(&self, max_len: usize) -> Result<Vec<u32>> {
        if self.0.len() > max_len {
            return Err(Error::Domain(format!(
                "{} digits exceed max length {}",
                self.0.len(),
                max_len
            )));
        }
        let mut ids: Vec<u32> = self.0.iter().map(|&d| u32::from(d) + 1).collect();
        ids.resize(max_len, PAD_TOKEN);
        Ok(ids)
    }

    pub fn from_token_ids(ids: &[u32]) -> Result<DigitSeq> {
        let digits: Vec<u8> = ids
            .iter()
            .take_while(|&&t| t != PAD_TOKEN)
            .map(|&t| match t {
                1..=10 => Ok((t - 1) as u8),
                _ => Err(Error::Domain(format!("token id {t} is not a digit"))),
            })
            .collect::<Result<_>>()?;
        if digits.is_empty() {
            return Err(Error::Domain("token sequence holds no digits".into()));
        }
        Ok(DigitSeq(digits))
    }
}

impl fmt::Display for DigitSeq {
    /// Renders the most-significant-first decimal string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &d in self.0.iter().rev() {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// `"123"` becomes `[3, 2, 1]`.
pub fn to_digits_rev(x: &str) -> Result<DigitSeq> {
    check_canonical(x)?;
    Ok(DigitSeq(x.bytes().rev().map(|b| b - b'0').collect()))
}

/// Drops the least significant decimal digit. Single-digit inputs are
/// degenerate.
pub fn truncate_last(x: &ExactInt) -> Result<ExactInt> {
    if x.0 < BigUint::from(10u32) {
        return Err(Error::Degenerate(format!(
            "{x} has a single digit, nothing left after truncation"
        )));
    }
    Ok(ExactInt(&x.0 / 10u32))
}

/// Reverses the decimal digits; trailing zeros become leading zeros and vanish.
pub fn reverse_digits(x: &ExactInt) -> ExactInt {
    let reversed: String = x.to_string().chars().rev().collect();
    let trimmed = reversed.trim_start_matches('0');
    if trimmed.is_empty() {
        ExactInt::zero()
    } else {
        ExactInt::from_decimal(trimmed).expect("digits of a canonical integer")
    }
}
