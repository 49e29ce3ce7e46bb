use hnd_core::features::{extract, residual, NumericPath, Scalar, EPSILON};
use hnd_core::float_wall::collides;
use hnd_core::hnd::pa01_off_by_one;
use hnd_core::triple_gen::stifel;
use hnd_core::{ExactInt, Triple};
use num_bigint::BigInt;
use proptest::prelude::*;

fn big_index(lead: u8, digits: Vec<u8>) -> ExactInt {
    let s: String = std::iter::once(lead)
        .chain(digits)
        .map(|d| char::from(b'0' + d))
        .collect();
    s.parse().unwrap()
}

#[test]
fn paths_diverge_below_ten_to_the_ten() {
    // colliding PA01 pairs where a^2 still survives the double sum
    let n = ExactInt::from(70_000_003u64);
    let t = stifel(&n).unwrap();
    let neg = pa01_off_by_one(&t, -1).unwrap();
    assert!(collides(t.c(), neg.c()));
    assert_ne!(extract(&neg, NumericPath::Float).f_res, EPSILON.ln());
}

#[test]
fn float_residual_overflows_to_nan() {
    let t = stifel(&ExactInt::pow10(80)).unwrap();
    assert!(extract(&t, NumericPath::Float).f_res.is_nan());
    assert!(extract(&t, NumericPath::Exact).f_res.is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5_000))]

    #[test]
    fn small_triples_agree(a in 1u64..=1 << 17, b in 1u64..=1 << 17, c in 1u64..=1 << 17) {
        let t = Triple::from_u64(a, b, c).unwrap();
        let exact = extract(&t, NumericPath::Exact).f_res;
        let float = extract(&t, NumericPath::Float).f_res;
        prop_assert!((exact - float).abs() <= 1e-9 * exact.abs().max(float.abs()).max(1.0), "{} vs {}", exact, float);
    }

    #[test]
    fn exact_residual_of_off_by_one(lead in 1u8..=9, digits in proptest::collection::vec(0u8..=9, 0..80), up in any::<bool>()) {
        let t = stifel(&big_index(lead, digits)).unwrap();
        let neg = pa01_off_by_one(&t, if up { 1 } else { -1 }).unwrap();
        let c = BigInt::from(t.c().as_biguint().clone());
        let twice: BigInt = &c * 2u32;
        let want: BigInt = if up { -(twice + 1u32) } else { twice - 1u32 };
        prop_assert_eq!(residual(&neg), want);
    }

    // past n = 10^10 a^2 is absorbed by b^2 in the double sum; past n = 10^76
    // c^2 overflows and the float residual is NaN
    #[test]
    fn float_path_collapses_beyond_the_wall(lead in 1u8..=9, digits in proptest::collection::vec(0u8..=9, 10..76), up in any::<bool>()) {
        let t = stifel(&big_index(lead, digits)).unwrap();
        let neg = pa01_off_by_one(&t, if up { 1 } else { -1 }).unwrap();
        prop_assert!(collides(t.c(), neg.c()));
        let pos_f = extract(&t, NumericPath::Float);
        let neg_f = extract(&neg, NumericPath::Float);
        prop_assert_eq!(neg_f.f_res, EPSILON.ln());
        prop_assert_eq!(&pos_f, &neg_f);
        let exact = extract(&neg, NumericPath::Exact);
        prop_assert!(exact.f_res > 40.0);
        prop_assert_ne!(exact.f_gap, extract(&t, NumericPath::Exact).f_gap);
        if let Scalar::Double(g) = neg_f.f_gap {
            prop_assert!(g == 1.0 || g == 0.0);
        }
    }
}
