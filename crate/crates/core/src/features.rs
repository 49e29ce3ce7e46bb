//! Engineered tree-model features, computed along two numeric paths.
//!
//! * `exact`: `c - b`, `b / a` and the residual `a^2 + b^2 - c^2` are taken
//!   in unbounded integers; only the final logarithm is a double.
//! * `float`: `a`, `b`, `c` are first rounded to the nearest double, then
//!   everything is native binary64 arithmetic, as a float64 pipeline would.
//!
//! `f_res = ln(|a^2 + b^2 - c^2| + EPSILON)` on both paths.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_num::ExactInt;
use crate::float_wall::double_image;
use crate::float_wall::DoubleImage;
use crate::triple_gen::Triple;

/// Additive floor inside the residual logarithm.
pub const EPSILON: f64 = 1e-12;
/// Significant digits of the exact-path ratio.
pub const RATIO_DIGITS: usize = 30;

pub const FEATURE_HEADER: &str = "f_gap,f_ratio,f_res,label,path";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericPath {
    Exact,
    Float,
}

impl NumericPath {
    pub fn as_str(self) -> &'static str {
        match self {
            NumericPath::Exact => "exact",
            NumericPath::Float => "float",
        }
    }
}

impl fmt::Display for NumericPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NumericPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<NumericPath> {
        match s {
            "exact" => Ok(NumericPath::Exact),
            "float" => Ok(NumericPath::Float),
            other => Err(Error::Domain(format!("unknown numeric path {other:?}"))),
        }
    }
}

/// A feature value: exact decimal text or a native double.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Scalar {
    Exact(String),
    Double(f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(s) => s.parse().expect("exact scalars are decimal text"),
            Scalar::Double(v) => *v,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(s) => f.write_str(s),
            Scalar::Double(v) => write!(f, "{v:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureVector {
    pub f_gap: Scalar,
    pub f_ratio: Scalar,
    pub f_res: f64,
    pub path: NumericPath,
}

pub fn extract(t: &Triple, path: NumericPath) -> FeatureVector {
    match path {
        NumericPath::Exact => extract_exact(t),
        NumericPath::Float => extract_float(t),
    }
}

fn signed(x: &ExactInt) -> BigInt {
    BigInt::from(x.as_biguint().clone())
}

/// Exact residual `a^2 + b^2 - c^2`.
pub fn residual(t: &Triple) -> BigInt {
    signed(&(&t.a().square() + &t.b().square())) - signed(&t.c().square())
}

fn extract_exact(t: &Triple) -> FeatureVector {
    let gap = signed(t.c()) - signed(t.b());
    FeatureVector {
        f_gap: Scalar::Exact(gap.to_string()),
        f_ratio: Scalar::Exact(decimal_quotient(t.b(), t.a(), RATIO_DIGITS)),
        f_res: ln_abs_plus_epsilon(&residual(t).magnitude().clone().into()),
        path: NumericPath::Exact,
    }
}

/// Converts an integer to the nearest double without touching float
/// arithmetic on anything but the exactly representable result.
pub fn to_f64(x: &ExactInt) -> f64 {
    match double_image(x) {
        DoubleImage::Infinity => f64::INFINITY,
        DoubleImage::Finite(v) => {
            let v = v.as_biguint();
            let shift = v.bits().saturating_sub(64);
            let top = (v >> shift).to_u64().expect("fits in 64 bits");
            // top has at most 53 significant bits here, so both steps are exact
            (top as f64) * 2f64.powi(shift as i32)
        }
    }
}

fn extract_float(t: &Triple) -> FeatureVector {
    let (a, b, c) = (to_f64(t.a()), to_f64(t.b()), to_f64(t.c()));
    let res = a * a + b * b - c * c;
    FeatureVector {
        f_gap: Scalar::Double(c - b),
        f_ratio: Scalar::Double(b / a),
        f_res: (res.abs() + EPSILON).ln(),
        path: NumericPath::Float,
    }
}

/// `ln(r + EPSILON)` for an exact non-negative `r`. Small residuals go through
/// a double directly; large ones split as `ln(prefix) + k ln 10` using the
/// leading 17 digits, where EPSILON is far below double resolution anyway.
pub fn ln_abs_plus_epsilon(r: &ExactInt) -> f64 {
    if r.is_zero() {
        return EPSILON.ln();
    }
    if let Some(v) = r.to_u64().filter(|v| *v < (1u64 << 53)) {
        return (v as f64 + EPSILON).ln();
    }
    let s = r.to_string();
    let keep = s.len().min(17);
    let prefix: f64 = s[..keep].parse().expect("decimal digits");
    prefix.ln() + (s.len() - keep) as f64 * std::f64::consts::LN_10
}

/// `num / den` to `sig` significant digits, round half up, as decimal text.
pub fn decimal_quotient(num: &ExactInt, den: &ExactInt, sig: usize) -> String {
    assert!(!den.is_zero(), "division by zero");
    assert!(sig >= 1);
    if num.is_zero() {
        return "0".into();
    }
    let (n, d) = (num.as_biguint(), den.as_biguint());
    // choose scale so that floor(n * 10^scale / d) has sig + 1 digits
    let int_digits = |v: &BigUint| v.to_string().len() as i64;
    let mut scale = sig as i64 + 1 - (int_digits(n) - int_digits(d));
    let quotient = |scale: i64| -> BigUint {
        if scale >= 0 {
            (n * BigUint::from(10u32).pow(scale as u32)) / d
        } else {
            n / (d * BigUint::from(10u32).pow((-scale) as u32))
        }
    };
    let mut q = quotient(scale);
    while int_digits(&q) < sig as i64 + 1 {
        scale += 1;
        q = quotient(scale);
    }
    while int_digits(&q) > sig as i64 + 1 {
        scale -= 1;
        q = quotient(scale);
    }
    let (mut kept, last) = q.div_rem(&BigUint::from(10u32));
    scale -= 1;
    if last >= BigUint::from(5u32) {
        kept += 1u32;
        if int_digits(&kept) > sig as i64 {
            kept /= 10u32;
            scale -= 1;
        }
    }
    let digits = kept.to_string();
    if scale <= 0 {
        let mut s = digits;
        s.extend(std::iter::repeat_n('0', (-scale) as usize));
        s
    } else if (scale as usize) < digits.len() {
        let split = digits.len() - scale as usize;
        format!("{}.{}", &digits[..split], &digits[split..])
    } else {
        let zeros = scale as usize - digits.len();
        format!("0.{}{}", "0".repeat(zeros), digits)
    }
}

/// Metadata written beside every feature file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub path: NumericPath,
    pub epsilon: f64,
    pub log_base: String,
    pub ratio_digits: usize,
    pub source: String,
    pub rows: u64,
}

/// One CSV line (without newline) in [`FEATURE_HEADER`] order.
pub fn feature_line(fv: &FeatureVector, label: &str) -> String {
    format!(
        "{},{},{:?},{},{}",
        fv.f_gap, fv.f_ratio, fv.f_res, label, fv.path
    )
}
