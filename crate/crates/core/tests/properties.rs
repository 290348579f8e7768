use num_rational::BigRational;
use proptest::prelude::*;

use modtrace::arith::int;
use modtrace::cmnum::PrecisionContext;
use modtrace::quadforms::{act, canonical_label, classes_gamma0, valid_residues, GroupElement};
use modtrace::traces::{admissible, trace_unstarred};
use modtrace::{Exponent, QExpansion, SUPPORTED_LEVELS};

fn series() -> impl Strategy<Value = QExpansion> {
    (-3i64..3, prop::collection::vec(-20i64..20, 1..10), 0i64..4)
        .prop_map(|(off, c, extra)| QExpansion::from_ints(off, &c, off + c.len() as i64 + extra))
}

fn unit_series() -> impl Strategy<Value = QExpansion> {
    (-3i64..3, prop::sample::select(vec![-3i64, -1, 1, 2]), prop::collection::vec(-20i64..20, 0..9)).prop_map(
        |(off, lead, rest)| {
            let mut c = vec![lead];
            c.extend(rest);
            QExpansion::from_ints(off, &c, off + c.len() as i64)
        },
    )
}

fn agree(x: &QExpansion, y: &QExpansion) -> bool {
    let t = x.trunc().min(y.trunc());
    x.truncate(t) == y.truncate(t)
}

/// Product of `T^k` and `[[1, 0], [N l, 1]]` factors, all in `Gamma_0(N)`.
fn gamma0_word(level: u32, word: &[(i64, i64)]) -> GroupElement {
    word.iter().fold(GroupElement::IDENTITY, |acc, &(k, l)| {
        let lower = GroupElement { a: 1, b: 0, c: level as i64 * l, d: 1 };
        acc.mul(&GroupElement::translation(k)).mul(&lower)
    })
}

fn gamma0_element() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-6i64..6, -3i64..3), 1..4)
}

fn level_and_discriminant() -> impl Strategy<Value = (u32, i64)> {
    prop::sample::select(SUPPORTED_LEVELS[1..].to_vec()).prop_flat_map(|level| {
        let ds: Vec<i64> = (3..80).filter(|&d| admissible(d, level)).collect();
        (Just(level), prop::sample::select(ds))
    })
}

proptest! {
    #[test]
    fn addition_and_multiplication_commute(a in series(), b in series()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
    }

    #[test]
    fn multiplication_distributes(a in series(), b in series(), c in series()) {
        prop_assert!(agree(&(&(&a + &b) * &c), &(&(&a * &c) + &(&b * &c))));
    }

    #[test]
    fn multiplication_associates(a in series(), b in series(), c in series()) {
        prop_assert!(agree(&(&(&a * &b) * &c), &(&a * &(&b * &c))));
    }

    #[test]
    fn subtraction_is_additive_inverse(a in series()) {
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&(-&a) + &a, QExpansion::zero(a.trunc()));
    }

    #[test]
    fn u_undoes_v(a in series(), t in 1u64..6) {
        prop_assert_eq!(a.v_operator(t).u_operator(t).unwrap(), a);
    }

    #[test]
    fn q_derivative_is_a_derivation(a in series(), b in series()) {
        let lhs = (&a * &b).q_derivative();
        let rhs = &(&a.q_derivative() * &b) + &(&a * &b.q_derivative());
        prop_assert!(agree(&lhs, &rhs));
    }

    #[test]
    fn inverse_multiplies_to_one(a in unit_series()) {
        let p = &a * &a.invert().unwrap();
        prop_assert_eq!(p.clone(), QExpansion::one(p.trunc()));
    }

    #[test]
    fn integer_powers_agree_with_products(a in unit_series(), k in 1i64..4) {
        let mut direct = QExpansion::one(Exponent::from_integer(1000));
        for _ in 0..k {
            direct = &direct * &a;
        }
        prop_assert!(agree(&a.pow_int(k).unwrap(), &direct));
        prop_assert!(agree(&(&a.pow_int(-k).unwrap() * &direct), &QExpansion::one(Exponent::from_integer(1000))));
    }

    #[test]
    fn scaling_is_linear(a in series(), b in series(), n in -5i64..5) {
        let c: BigRational = int(n);
        prop_assert_eq!((&a + &b).scale(&c), &a.scale(&c) + &b.scale(&c));
    }

    #[test]
    fn labels_are_gamma0_invariant(
        (level, d) in level_and_discriminant(),
        which in 0usize..64,
        word in gamma0_element(),
    ) {
        let g = gamma0_word(level, &word);
        prop_assume!([g.a, g.b, g.c, g.d].iter().all(|x| x.abs() <= 5000));
        prop_assert!(g.in_gamma0(level) && g.det() == 1);
        let h = valid_residues(d, level)[0];
        let classes = classes_gamma0(d, level, h).unwrap();
        let q = classes[which % classes.len()].rep;
        let moved = act(&q, &g);
        prop_assert_eq!(moved.discriminant(), q.discriminant());
        prop_assert_eq!(moved.a.rem_euclid(level as i64), 0);
        prop_assert_eq!(canonical_label(&moved, level), canonical_label(&q, level));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn traces_do_not_depend_on_h((level, d) in level_and_discriminant(), m in 1u32..4) {
        let ctx = PrecisionContext::default();
        let hs = valid_residues(d, level);
        let first = trace_unstarred(level, m, d, hs[0], &ctx).unwrap();
        for &h in &hs[1..] {
            prop_assert_eq!(trace_unstarred(level, m, d, h, &ctx).unwrap(), first.clone());
        }
    }
}
