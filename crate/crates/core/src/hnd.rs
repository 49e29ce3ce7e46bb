//! Hard-negative attack registry.
//!
//! Every attack turns a base triple (or, for the structural tier, just a
//! magnitude hint) into an adversarial triple whose defining property can be
//! checked in exact arithmetic. Labels are always recomputed with
//! [`classify`]; an attack that would yield a `pos` sample is treated as not
//! applicable and the base is resampled.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_num::{reverse_digits, truncate_last, ExactInt};
use crate::rng::SampleRng;
use crate::triple_gen::{classify, stifel, verify_equation, GenParams, Label, Triple};

/// Resampling attempts before [`Error::RetryExhausted`].
pub const MAX_RETRIES: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Precision,
    Modular,
    Structural,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AttackSpec {
    pub code: String,
    pub aliases: Vec<String>,
    pub tier: Tier,
    pub description: String,
}

impl AttackSpec {
    fn new(code: &str, tier: Tier, description: &str) -> AttackSpec {
        AttackSpec {
            code: code.into(),
            aliases: Vec::new(),
            tier,
            description: description.into(),
        }
    }

    fn alias(mut self, alias: &str) -> AttackSpec {
        self.aliases.push(alias.into());
        self
    }
}

/// The triple an attack starts from, with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Base {
    pub triple: Triple,
    pub origin: Option<GenParams>,
}

impl Base {
    pub fn stifel(n: &ExactInt) -> Result<Base> {
        Ok(Base {
            triple: stifel(n)?,
            origin: Some(GenParams::Stifel { n: n.clone() }),
        })
    }

    pub fn bare(triple: Triple) -> Base {
        Base {
            triple,
            origin: None,
        }
    }

    /// Index used as a size hint by structural attacks and resampling.
    fn magnitude(&self) -> ExactInt {
        self.origin
            .as_ref()
            .and_then(GenParams::index)
            .unwrap_or_else(ExactInt::one)
    }
}

/// An attack's output before labelling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mutation {
    pub triple: Triple,
    pub origin: Option<GenParams>,
}

pub trait Attack: Send + Sync {
    fn spec(&self) -> &AttackSpec;

    /// Produces the adversarial triple, or [`Error::NotApplicable`] when the
    /// base cannot host this attack.
    fn mutate(&self, base: &Base, rng: &mut SampleRng) -> Result<Mutation>;

    /// Machine-checkable statement of what the attack guarantees.
    fn defining_property(&self, original: &Triple, mutated: &Triple) -> bool;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabeledSample {
    pub triple: Triple,
    pub label: Label,
    pub attack: Option<String>,
    pub origin: Option<GenParams>,
    pub seed_path: String,
}

impl LabeledSample {
    pub fn new(
        triple: Triple,
        attack: Option<String>,
        origin: Option<GenParams>,
        seed_path: String,
    ) -> LabeledSample {
        LabeledSample {
            label: classify(&triple),
            triple,
            attack,
            origin,
            seed_path,
        }
    }
}

fn not_applicable(code: &str, reason: impl Into<String>) -> Error {
    Error::NotApplicable {
        code: code.into(),
        reason: reason.into(),
    }
}

// ---- precision tier ----

/// `c' = c + direction`, direction in {+1, -1}.
pub fn pa01_off_by_one(t: &Triple, direction: i8) -> Result<Triple> {
    match direction {
        1 => t.with_c(t.c() + 1),
        -1 => match t.c().checked_sub(&ExactInt::one()) {
            Some(c) if !c.is_zero() => t.with_c(c),
            _ => Err(Error::Degenerate("c = 1 cannot move down".into())),
        },
        other => Err(Error::Domain(format!(
            "direction must be +1 or -1, got {other}"
        ))),
    }
}

/// `c' = round(c * (10^15 + 1) / 10^15)`, ties away from zero, computed as an
/// exact rational. Not applicable when the drift rounds away.
pub fn pa02_float_drift(t: &Triple) -> Result<Triple> {
    let scale = ExactInt::pow10(15);
    let num = t.c() * &(&scale + 1);
    let (q, r) = num.div_rem(&scale);
    let c = if &r * 2 >= scale { &q + 1 } else { q };
    if &c == t.c() {
        return Err(not_applicable(
            "PA02",
            format!("drift on c={} rounds to zero", t.c()),
        ));
    }
    t.with_c(c)
}

pub fn pa03_truncate(t: &Triple) -> Result<Triple> {
    t.with_c(truncate_last(t.c())?)
}

// ---- modular tier ----

pub fn ar01_digit_swap(t: &Triple) -> Result<Triple> {
    if t.c().is_palindrome() {
        return Err(not_applicable(
            "AR01",
            format!("c={} is a palindrome", t.c()),
        ));
    }
    let swapped = t.with_c(reverse_digits(t.c()))?;
    if classify(&swapped) != Label::NegEq {
        return Err(not_applicable(
            "AR01",
            "reversed triple still satisfies the equation",
        ));
    }
    Ok(swapped)
}

/// `a^2 + b^2 = c^2 (mod modulus)`.
pub fn verify_mod(t: &Triple, modulus: u64) -> bool {
    assert!(modulus >= 2, "modulus must be >= 2");
    let m = ExactInt::from(modulus);
    let lhs = (&t.a().square() + &t.b().square()).div_rem(&m).1;
    let rhs = t.c().square().div_rem(&m).1;
    lhs == rhs
}

/// `c' = c + modulus`: same residue class, equation broken.
pub fn mod_mimic(t: &Triple, modulus: u64) -> Result<Triple> {
    if !matches!(modulus, 3 | 7 | 10 | 11) {
        return Err(Error::Domain(format!(
            "mimicry modulus must be one of 3, 7, 10, 11, got {modulus}"
        )));
    }
    // j = 1 suffices whenever the base satisfies the equation; the loop
    // covers arbitrary bases.
    let mut c = t.c() + modulus;
    loop {
        let fake = t.with_c(c.clone())?;
        if !verify_equation(&fake) {
            return Ok(fake);
        }
        c = &c + modulus;
    }
}

// ---- structural tier ----

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructuralCode {
    /// Plato family, `c - b = 2`.
    St01,
    /// Fibonacci family from `i >= 3`, `c - b = F_i^2`.
    St02,
    /// Euclid with `m - k >= 2`, `c - b = (m - k)^2`.
    St03,
}

/// Draws a structural imposter whose size tracks `magnitude` (a Stifel index).
pub fn structural(
    code: StructuralCode,
    magnitude: &ExactInt,
    rng: &mut SampleRng,
) -> Result<(Triple, GenParams)> {
    let mag = if magnitude.is_zero() {
        ExactInt::one()
    } else {
        magnitude.clone()
    };
    let params = match code {
        StructuralCode::St01 => {
            let lo = std::cmp::max(ExactInt::from(2u64), mag.clone());
            let hi = std::cmp::max(lo.clone(), &mag * 2);
            GenParams::Plato {
                n: rng.range_big(&lo, &hi),
            }
        }
        StructuralCode::St02 => {
            // F_i grows like phi^i, so c has about 0.42 * i digits
            let digits = mag.square().digit_count() as u64;
            let hi = std::cmp::max(3, digits * 12 / 5);
            GenParams::Fibonacci {
                i: rng.range_u64(3, hi),
            }
        }
        StructuralCode::St03 => {
            let k = rng.range_big(&ExactInt::one(), &mag);
            let two = ExactInt::from(2u64);
            let gap = rng.range_big(&two, &std::cmp::max(two.clone(), mag));
            GenParams::Euclid { m: &k + &gap, k }
        }
    };
    Ok((params.generate()?, params))
}

// ---- registry ----

struct OffByOne(AttackSpec);
struct FloatDrift(AttackSpec);
struct Truncate(AttackSpec);
struct DigitSwap(AttackSpec);
struct ModMimic(AttackSpec, u64);
struct Structural(AttackSpec, StructuralCode);

fn same_legs(original: &Triple, mutated: &Triple) -> bool {
    original.a() == mutated.a() && original.b() == mutated.b()
}

impl Attack for OffByOne {
    fn spec(&self) -> &AttackSpec {
        &self.0
    }

    fn mutate(&self, base: &Base, rng: &mut SampleRng) -> Result<Mutation> {
        let direction = if rng.coin() { 1 } else { -1 };
        let triple = pa01_off_by_one(&base.triple, direction)
            .map_err(|e| not_applicable("PA01", e.to_string()))?;
        Ok(Mutation {
            triple,
            origin: base.origin.clone(),
        })
    }

    fn defining_property(&self, original: &Triple, mutated: &Triple) -> bool {
        same_legs(original, mutated) && original.c().abs_diff(mutated.c()) == ExactInt::one()
    }
}

impl Attack for FloatDrift {
    fn spec(&self) -> &AttackSpec {
        &self.0
    }

    fn mutate(&self, base: &Base, _rng: &mut SampleRng) -> Result<Mutation> {
        Ok(Mutation {
            triple: pa02_float_drift(&base.triple)?,
            origin: base.origin.clone(),
        })
    }

    fn defining_property(&self, original: &Triple, mutated: &Triple) -> bool {
        same_legs(original, mutated)
            && pa02_float_drift(original).is_ok_and(|t| t.c() == mutated.c())
    }
}

impl Attack for Truncate {
    fn spec(&self) -> &AttackSpec {
        &self.0
    }

    fn mutate(&self, base: &Base, _rng: &mut SampleRng) -> Result<Mutation> {
        let triple =
            pa03_truncate(&base.triple).map_err(|e| not_applicable("PA03", e.to_string()))?;
        Ok(Mutation {
            triple,
            origin: base.origin.clone(),
        })
    }

    fn defining_property(&self, original: &Triple, mutated: &Triple) -> bool {
        same_legs(original, mutated) && truncate_last(original.c()).is_ok_and(|c| &c == mutated.c())
    }
}

impl Attack for DigitSwap {
    fn spec(&self) -> &AttackSpec {
        &self.0
    }

    fn mutate(&self, base: &Base, _rng: &mut SampleRng) -> Result<Mutation> {
        Ok(Mutation {
            triple: ar01_digit_swap(&base.triple)?,
            origin: base.origin.clone(),
        })
    }

    fn defining_property(&self, original: &Triple, mutated: &Triple) -> bool {
        same_legs(original, mutated)
            && !original.c().is_palindrome()
            && &reverse_digits(original.c()) == mutated.c()
            && !verify_equation(mutated)
    }
}

impl Attack for ModMimic {
    fn spec(&self) -> &AttackSpec {
        &self.0
    }

    fn mutate(&self, base: &Base, _rng: &mut SampleRng) -> Result<Mutation> {
        Ok(Mutation {
            triple: mod_mimic(&base.triple, self.1)?,
            origin: base.origin.clone(),
        })
    }

    fn defining_property(&self, original: &Triple, mutated: &Triple) -> bool {
        same_legs(original, mutated)
            && mutated.c() > original.c()
            && mutated.c().rem_u64(self.1) == original.c().rem_u64(self.1)
            && verify_mod(mutated, self.1)
            && !verify_equation(mutated)
    }
}

impl Attack for Structural {
    fn spec(&self) -> &AttackSpec {
        &self.0
    }

    fn mutate(&self, base: &Base, rng: &mut SampleRng) -> Result<Mutation> {
        let (triple, params) = structural(self.1, &base.magnitude(), rng)?;
        Ok(Mutation {
            triple,
            origin: Some(params),
        })
    }

    fn defining_property(&self, _original: &Triple, mutated: &Triple) -> bool {
        verify_equation(mutated) && mutated.gap() != Some(ExactInt::one())
    }
}

/// Attack lookup by code or alias.
pub struct Registry {
    attacks: Vec<Arc<dyn Attack>>,
    by_code: BTreeMap<String, usize>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.by_code.keys()).finish()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::empty()
    }
}

impl Registry {
    pub fn empty() -> Registry {
        Registry {
            attacks: Vec::new(),
            by_code: BTreeMap::new(),
        }
    }

    /// The eleven defined vectors.
    pub fn standard() -> Registry {
        use StructuralCode::*;

        let mut r = Registry::empty();
        let attacks: Vec<Arc<dyn Attack>> = vec![
            Arc::new(OffByOne(AttackSpec::new(
                "PA01",
                Tier::Precision,
                "off-by-one hypotenuse, c +/- 1",
            ))),
            Arc::new(FloatDrift(AttackSpec::new(
                "PA02",
                Tier::Precision,
                "float drift, c * (1 + 1e-15) rounded",
            ))),
            Arc::new(Truncate(
                AttackSpec::new(
                    "PA03",
                    Tier::Precision,
                    "truncation, drop the last digit of c",
                )
                .alias("PA06"),
            )),
            Arc::new(DigitSwap(AttackSpec::new(
                "AR01",
                Tier::Modular,
                "digit swap, c reversed",
            ))),
            Arc::new(ModMimic(
                AttackSpec::new("AR02", Tier::Modular, "mod 10 mimicry, c + 10"),
                10,
            )),
            Arc::new(ModMimic(
                AttackSpec::new("AR03", Tier::Modular, "mod 7 mimicry, c + 7"),
                7,
            )),
            Arc::new(ModMimic(
                AttackSpec::new("AR04", Tier::Modular, "mod 3 mimicry, c + 3"),
                3,
            )),
            Arc::new(ModMimic(
                AttackSpec::new("AR05", Tier::Modular, "mod 11 mimicry, c + 11"),
                11,
            )),
            Arc::new(Structural(
                AttackSpec::new("ST01", Tier::Structural, "Plato family, c - b = 2"),
                St01,
            )),
            Arc::new(Structural(
                AttackSpec::new("ST02", Tier::Structural, "Fibonacci family, c - b = F_i^2"),
                St02,
            )),
            Arc::new(Structural(
                AttackSpec::new(
                    "ST03",
                    Tier::Structural,
                    "Euclid family with m - k >= 2, c - b = (m - k)^2",
                ),
                St03,
            )),
        ];
        for a in attacks {
            r.register(a).expect("standard codes are unique");
        }
        r
    }

    pub fn register(&mut self, attack: Arc<dyn Attack>) -> Result<()> {
        let spec = attack.spec();
        let names: Vec<String> = std::iter::once(spec.code.clone())
            .chain(spec.aliases.iter().cloned())
            .collect();
        for name in &names {
            if !is_valid_code(name) {
                return Err(Error::Domain(format!(
                    "attack code {name:?} must be non-empty ASCII alphanumeric"
                )));
            }
            if self.by_code.contains_key(name) {
                return Err(Error::DuplicateAttack(name.clone()));
            }
        }
        let idx = self.attacks.len();
        self.attacks.push(attack);
        for name in names {
            self.by_code.insert(name, idx);
        }
        Ok(())
    }

    pub fn get(&self, code: &str) -> Result<&Arc<dyn Attack>> {
        self.by_code
            .get(code)
            .map(|&i| &self.attacks[i])
            .ok_or_else(|| Error::UnknownAttack(code.into()))
    }

    /// Primary codes in registration order.
    pub fn codes(&self) -> Vec<&str> {
        self.attacks
            .iter()
            .map(|a| a.spec().code.as_str())
            .collect()
    }

    pub fn specs(&self) -> impl Iterator<Item = &AttackSpec> {
        self.attacks.iter().map(|a| a.spec())
    }

    /// Runs `code` on `base`. Not-applicable outcomes (including any that
    /// would label `pos`) resample a larger Stifel base: attempt `j` replaces
    /// the previous index `n` with `n * 10^j + u`, `u` uniform in `[0, 10^j)`.
    pub fn apply(
        &self,
        code: &str,
        base: &Base,
        rng: &mut SampleRng,
        seed_path: &str,
    ) -> Result<LabeledSample> {
        let attack = self.get(code)?;
        let primary = attack.spec().code.clone();
        let mut current = base.clone();
        for attempt in 0..=MAX_RETRIES {
            if attempt > 0 {
                let n = current.magnitude();
                let spread = ExactInt::pow10(attempt);
                let n = &(&n * &spread) + &rng.below_big(&spread);
                current = Base::stifel(&n)?;
            }
            match attack.mutate(&current, rng) {
                Ok(m) => {
                    let sample = LabeledSample::new(
                        m.triple,
                        Some(primary.clone()),
                        m.origin,
                        if attempt == 0 {
                            seed_path.to_string()
                        } else {
                            format!("{seed_path}/r{attempt}")
                        },
                    );
                    if sample.label == Label::Pos {
                        continue;
                    }
                    debug_assert!(attack.defining_property(&current.triple, &sample.triple));
                    return Ok(sample);
                }
                Err(Error::NotApplicable { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::RetryExhausted {
            code: primary,
            attempts: MAX_RETRIES + 1,
        })
    }
}

pub fn is_valid_code(code: &str) -> bool {
    !code.is_empty() && code.bytes().all(|b| b.is_ascii_alphanumeric())
}

/// Process-wide registry of the standard attacks.
pub fn standard_registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(Registry::standard)
}

/// [`Registry::apply`] on the standard registry.
pub fn apply_attack(
    code: &str,
    base: &Base,
    rng: &mut SampleRng,
    seed_path: &str,
) -> Result<LabeledSample> {
    standard_registry().apply(code, base, rng, seed_path)
}
