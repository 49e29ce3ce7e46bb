use hnd_core::hnd::{standard_registry, verify_mod, Base};
use hnd_core::triple_gen::{classify, verify_equation, Label};
use hnd_core::{ExactInt, SampleRng};
use proptest::prelude::*;

fn base_index(digits: Vec<u8>) -> ExactInt {
    let s: String = std::iter::once(1u8)
        .chain(digits)
        .map(|d| char::from(b'0' + d))
        .collect();
    s.parse().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn every_attack_is_sound(
        code_idx in 0usize..11,
        digits in proptest::collection::vec(0u8..=9, 0..60),
        seed in any::<u64>(),
        index in any::<u64>(),
    ) {
        let registry = standard_registry();
        let code = registry.codes()[code_idx];
        let base = Base::stifel(&base_index(digits)).unwrap();
        let mut rng = SampleRng::keyed(seed, 0, index);
        let s = registry.apply(code, &base, &mut rng, "p").unwrap();
        let t = &s.triple;
        prop_assert_ne!(s.label, Label::Pos);
        prop_assert_eq!(s.label, classify(t));
        prop_assert_eq!(s.attack.as_deref(), Some(code));
        match code {
            "AR02" => prop_assert!(verify_mod(t, 10) && !verify_equation(t)),
            "AR03" => prop_assert!(verify_mod(t, 7) && !verify_equation(t)),
            "AR04" => prop_assert!(verify_mod(t, 3) && !verify_equation(t)),
            "AR05" => prop_assert!(verify_mod(t, 11) && !verify_equation(t)),
            "ST01" | "ST02" | "ST03" => {
                prop_assert!(verify_equation(t));
                prop_assert_ne!(t.gap(), Some(ExactInt::one()));
                prop_assert_eq!(s.label, Label::NegFamily);
            }
            _ => prop_assert_eq!(s.label, Label::NegEq),
        }
    }

    #[test]
    fn same_seed_path_same_sample(
        code_idx in 0usize..11,
        n in 1u64..1_000_000_000_000,
        seed in any::<u64>(),
        shard in 0u64..1000,
        index in 0u64..100_000,
    ) {
        let registry = standard_registry();
        let code = registry.codes()[code_idx];
        let base = Base::stifel(&ExactInt::from(n)).unwrap();
        let draw = || {
            let mut rng = SampleRng::keyed(seed, shard, index);
            registry.apply(code, &base, &mut rng, "x").unwrap()
        };
        prop_assert_eq!(draw(), draw());
    }
}
