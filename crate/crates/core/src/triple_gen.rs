//! Triple families and the exact verification oracles.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_num::ExactInt;

/// Three positive integers. Ordering `a < b < c` is not assumed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    a: ExactInt,
    b: ExactInt,
    c: ExactInt,
}

impl Triple {
    pub fn new(a: ExactInt, b: ExactInt, c: ExactInt) -> Result<Triple> {
        if a.is_zero() || b.is_zero() || c.is_zero() {
            return Err(Error::Domain(format!(
                "triple components must be >= 1, got ({a}, {b}, {c})"
            )));
        }
        Ok(Triple { a, b, c })
    }

    pub fn from_u64(a: u64, b: u64, c: u64) -> Result<Triple> {
        Triple::new(a.into(), b.into(), c.into())
    }

    pub fn a(&self) -> &ExactInt {
        &self.a
    }

    pub fn b(&self) -> &ExactInt {
        &self.b
    }

    pub fn c(&self) -> &ExactInt {
        &self.c
    }

    /// Same legs, different hypotenuse.
    pub fn with_c(&self, c: ExactInt) -> Result<Triple> {
        Triple::new(self.a.clone(), self.b.clone(), c)
    }

    /// `c - b` when `c >= b`.
    pub fn gap(&self) -> Option<ExactInt> {
        self.c.checked_sub(&self.b)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    /// Equation holds and `c - b = 1`.
    Pos,
    /// Equation holds but `c - b != 1`.
    NegFamily,
    /// Equation fails.
    NegEq,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Pos => "pos",
            Label::NegFamily => "neg_family",
            Label::NegEq => "neg_eq",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        match s {
            "pos" => Ok(Label::Pos),
            "neg_family" => Ok(Label::NegFamily),
            "neg_eq" => Ok(Label::NegEq),
            other => Err(Error::Domain(format!("unknown label {other:?}"))),
        }
    }
}

/// Generator provenance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GenParams {
    Stifel { n: ExactInt },
    Euclid { m: ExactInt, k: ExactInt },
    Plato { n: ExactInt },
    Fibonacci { i: u64 },
}

impl GenParams {
    pub fn generate(&self) -> Result<Triple> {
        match self {
            GenParams::Stifel { n } => stifel(n),
            GenParams::Euclid { m, k } => euclid(m, k),
            GenParams::Plato { n } => plato(n),
            GenParams::Fibonacci { i } => fibonacci_triple(*i),
        }
    }

    /// Single-integer index, when the family has one (Euclid has a pair).
    pub fn index(&self) -> Option<ExactInt> {
        match self {
            GenParams::Stifel { n } | GenParams::Plato { n } => Some(n.clone()),
            GenParams::Fibonacci { i } => Some(ExactInt::from(*i)),
            GenParams::Euclid { .. } => None,
        }
    }
}

/// `(2n+1, 2n(n+1), 2n(n+1)+1)`.
pub fn stifel(n: &ExactInt) -> Result<Triple> {
    if n.is_zero() {
        return Err(Error::Domain("stifel requires n >= 1".into()));
    }
    Ok(stifel_unchecked(n.as_biguint()))
}

fn stifel_unchecked(n: &BigUint) -> Triple {
    let two_n: BigUint = n << 1u32;
    let a = &two_n + 1u32;
    let b = &two_n * (n + 1u32);
    let c = &b + 1u32;
    Triple {
        a: a.into(),
        b: b.into(),
        c: c.into(),
    }
}

/// `(m^2 - k^2, 2mk, m^2 + k^2)`; no coprimality or parity filter.
pub fn euclid(m: &ExactInt, k: &ExactInt) -> Result<Triple> {
    if k.is_zero() || m <= k {
        return Err(Error::Domain(format!(
            "euclid requires m > k >= 1, got m={m}, k={k}"
        )));
    }
    let (m2, k2) = (m.square(), k.square());
    let a = m2.checked_sub(&k2).expect("m > k");
    let b = &(m * k) * 2;
    let c = &m2 + &k2;
    Triple::new(a, b, c)
}

/// `(2n, n^2 - 1, n^2 + 1)`, in that order.
pub fn plato(n: &ExactInt) -> Result<Triple> {
    if *n < ExactInt::from(2u64) {
        return Err(Error::Domain(format!("plato requires n >= 2, got {n}")));
    }
    let n2 = n.square();
    Triple::new(
        n * 2,
        n2.checked_sub(&ExactInt::one()).expect("n >= 2"),
        &n2 + 1,
    )
}

/// `F_i` with `F_1 = F_2 = 1`, by fast doubling.
pub fn fibonacci(i: u64) -> ExactInt {
    // (F(k), F(k+1)) walking the bits of i from the top
    let mut f = BigUint::zero();
    let mut g = BigUint::one();
    for bit in (0..64 - i.leading_zeros()).rev() {
        let two_g_minus_f = (&g << 1u32) - &f;
        let f2 = &f * &two_g_minus_f;
        let g2 = &f * &f + &g * &g;
        if (i >> bit) & 1 == 1 {
            f = g2.clone();
            g = f2 + g2;
        } else {
            f = f2;
            g = g2;
        }
    }
    f.into()
}

/// From four consecutive Fibonacci numbers `F_i..F_{i+3}`:
/// `(F_i F_{i+3}, 2 F_{i+1} F_{i+2}, F_{i+1}^2 + F_{i+2}^2)`.
pub fn fibonacci_triple(i: u64) -> Result<Triple> {
    if i < 1 {
        return Err(Error::Domain("fibonacci_triple requires i >= 1".into()));
    }
    let f0 = fibonacci(i);
    let f1 = fibonacci(i + 1);
    let f2 = &f0 + &f1;
    let f3 = &f1 + &f2;
    Triple::new(&f0 * &f3, &(&f1 * &f2) * 2, &f1.square() + &f2.square())
}

/// `a^2 + b^2 = c^2` in exact arithmetic.
pub fn verify_equation(t: &Triple) -> bool {
    &t.a.square() + &t.b.square() == t.c.square()
}

pub fn classify(t: &Triple) -> Label {
    if !verify_equation(t) {
        Label::NegEq
    } else if t.gap() == Some(ExactInt::one()) {
        Label::Pos
    } else {
        Label::NegFamily
    }
}

/// Lazy Stifel triples for `n` in `[start, end]`; seeks directly to `start`.
#[derive(Clone, Debug)]
pub struct StifelStream {
    next: BigUint,
    end: BigUint,
}

impl StifelStream {
    pub fn new(start: &ExactInt, end: &ExactInt) -> Result<StifelStream> {
        if start.is_zero() {
            return Err(Error::Domain("stifel stream must start at n >= 1".into()));
        }
        Ok(StifelStream {
            next: start.as_biguint().clone(),
            end: end.as_biguint().clone(),
        })
    }
}

impl Iterator for StifelStream {
    type Item = (ExactInt, Triple);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next > self.end {
            return None;
        }
        let t = stifel_unchecked(&self.next);
        let n = self.next.clone();
        self.next += 1u32;
        Some((n.into(), t))
    }
}
