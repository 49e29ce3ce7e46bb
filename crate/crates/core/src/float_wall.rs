//! IEEE-754 binary64 representability of integers, computed with integer
//! arithmetic only. Nothing in this module executes a floating-point
//! instruction; the results stay trustworthy past the magnitude where doubles
//! stop separating consecutive integers.

use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_num::ExactInt;
use crate::triple_gen::stifel;

/// Explicit significand bits of a binary64.
pub const MANTISSA_BITS: u64 = 52;
/// Largest finite binade exponent; values at or above `2^1024` overflow.
pub const MAX_EXPONENT: u64 = 1023;

/// `2^53 - 1`, the largest `M` such that every integer in `[0, M]` is a double.
pub fn max_safe_int() -> ExactInt {
    ExactInt::pow2(MANTISSA_BITS + 1)
        .checked_sub(&ExactInt::one())
        .expect("2^53 >= 1")
}

/// `e` such that `2^e <= x < 2^(e+1)`; zero maps to 0.
pub fn binade_exponent(x: &ExactInt) -> u64 {
    x.bits().saturating_sub(1)
}

/// Spacing of consecutive doubles in the binade of `x`:
/// `2^max(0, e - 52)`. Zero is defined to have gap 1.
pub fn ulp_gap(x: &ExactInt) -> ExactInt {
    ExactInt::pow2(binade_exponent(x).saturating_sub(MANTISSA_BITS))
}

/// The double nearest to `x` (round half to even) as an exact integer.
/// Fails when the rounded value reaches `2^1024`.
pub fn round_to_double(x: &ExactInt) -> Result<ExactInt> {
    let bits = x.bits();
    let rounded = if bits <= MANTISSA_BITS + 1 {
        x.clone()
    } else {
        let shift = bits - (MANTISSA_BITS + 1);
        let v = x.as_biguint();
        let mut q: BigUint = v >> shift;
        let r: BigUint = v - (&q << shift);
        let half = BigUint::one() << (shift - 1);
        let q_odd = q.bit(0);
        if r > half || (r == half && q_odd) {
            q += 1u32;
        }
        ExactInt::from(q << shift)
    };
    if rounded.bits() > MAX_EXPONENT + 1 {
        return Err(Error::Overflow);
    }
    Ok(rounded)
}

/// Where an integer lands after conversion to a double.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubleImage {
    Finite(ExactInt),
    Infinity,
}

pub fn double_image(x: &ExactInt) -> DoubleImage {
    match round_to_double(x) {
        Ok(v) => DoubleImage::Finite(v),
        Err(_) => DoubleImage::Infinity,
    }
}

/// True iff `x` and `y` convert to the same double.
pub fn collides(x: &ExactInt, y: &ExactInt) -> bool {
    double_image(x) == double_image(y)
}

/// Representability record for one integer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FloatWallReport {
    pub value: ExactInt,
    pub binade_exponent: u64,
    pub ulp_gap: ExactInt,
    pub nearest: DoubleImage,
    pub is_exact: bool,
    pub collides_with_successor: bool,
}

impl FloatWallReport {
    pub fn new(value: &ExactInt) -> FloatWallReport {
        let gap = ulp_gap(value);
        let nearest = double_image(value);
        let is_exact = matches!(nearest, DoubleImage::Finite(_)) && value.div_rem(&gap).1.is_zero();
        FloatWallReport {
            value: value.clone(),
            binade_exponent: binade_exponent(value),
            ulp_gap: gap,
            nearest,
            is_exact,
            collides_with_successor: collides(value, &(value + 1)),
        }
    }
}

/// One row of the wall scan: the Stifel leg `b` at the first `n` whose
/// `b = 2n(n+1)` reaches `2 * 10^decimal_exp`, so even rows land on
/// `n = 10^(decimal_exp / 2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WallRow {
    pub decimal_exp: u32,
    pub n: ExactInt,
    pub b_digits: usize,
    pub report: FloatWallReport,
    /// Whether the hypotenuse `c = b + 1` and `c + 1` collide.
    pub hypotenuse_collides: bool,
}

/// Smallest `n >= 1` with `2n(n+1) >= target`.
pub fn first_stifel_index_reaching(target: &ExactInt) -> ExactInt {
    let t = target.as_biguint();
    let leg = |n: &BigUint| (n << 1u32) * (n + 1u32);
    // 2n^2 < 2n(n+1), so sqrt(t/2) never overshoots by more than one step
    let mut n = (t >> 1u32).sqrt();
    if n.is_zero() {
        n = BigUint::one();
    }
    while n > BigUint::one() && leg(&(&n - 1u32)) >= *t {
        n -= 1u32;
    }
    while leg(&n) < *t {
        n += 1u32;
    }
    n.into()
}

pub fn wall_scan(min_exp: u32, max_exp: u32) -> Result<Vec<WallRow>> {
    if min_exp < 1 || min_exp > max_exp || max_exp as u64 > MAX_EXPONENT {
        return Err(Error::Domain(format!(
            "wall scan needs 1 <= min_exp <= max_exp <= {MAX_EXPONENT}, got {min_exp}..{max_exp}"
        )));
    }
    (min_exp..=max_exp)
        .map(|d| {
            let n = first_stifel_index_reaching(&(&ExactInt::pow10(d) * 2));
            let t = stifel(&n)?;
            Ok(WallRow {
                decimal_exp: d,
                b_digits: t.b().digit_count(),
                report: FloatWallReport::new(t.b()),
                hypotenuse_collides: collides(t.c(), &(t.c() + 1)),
                n,
            })
        })
        .collect()
}

pub const WALL_TABLE_HEADER: &str = "decimal_exp,n,b_digits,ulp_gap,collision";

/// Comma-delimited table, `collision` being whether `c` and `c + 1` collide.
pub fn write_wall_table<W: Write>(rows: &[WallRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{WALL_TABLE_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.decimal_exp, row.n, row.b_digits, row.report.ulp_gap, row.hypotenuse_collides
        )?;
    }
    Ok(())
}
