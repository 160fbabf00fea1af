use freeact_core::cohomology::{
    cohomology, differential, is_coboundary, random_cochain, random_cocycle, CoefficientModule, Cochain,
};
use freeact_core::groups::FgAbelianGroup;
use num_integer::Integer;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_group() -> impl Strategy<Value = FgAbelianGroup> {
    prop_oneof![
        (2u64..=6).prop_map(FgAbelianGroup::cyclic),
        (2u64..=3, 2u64..=3).prop_map(|(a, b)| FgAbelianGroup::new(vec![a, b])),
    ]
}

/// Künneth count for trivial circle coefficients: `H²(Z_a × Z_b) = Z_gcd`, `H²(Z_n) = 0`.
fn h2_order_oracle(g: &FgAbelianGroup) -> u64 {
    match g.factors() {
        [_] => 1,
        [a, b] => a.gcd(b),
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn d_squared_vanishes(g in small_group(), seed in any::<u64>(), n in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeff = CoefficientModule::trivial(&g, g.exponent(), 1);
        let c = random_cochain(&g, &coeff, n, &mut rng);
        let dc = differential(&g, &coeff, &c).unwrap();
        prop_assert!(differential(&g, &coeff, &dc).unwrap().is_zero());
    }

    #[test]
    fn coboundaries_have_witnesses(g in small_group(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeff = CoefficientModule::trivial(&g, g.exponent(), 1);
        let h = random_cochain(&g, &coeff, 1, &mut rng);
        let dh = differential(&g, &coeff, &h).unwrap();
        let w = is_coboundary(&g, &coeff, &dh).unwrap().expect("dh is a coboundary");
        let lifted = coeff.with_modulus(w.modulus);
        prop_assert_eq!(differential(&g, &lifted, &w).unwrap(), dh.embed(w.modulus).unwrap());
    }

    #[test]
    fn h2_matches_kunneth(g in small_group()) {
        let coeff = CoefficientModule::trivial(&g, g.exponent(), 1);
        let h2 = cohomology(&g, &coeff, 2).unwrap();
        prop_assert_eq!(h2.order(), Some(h2_order_oracle(&g)));
    }

    #[test]
    fn classes_are_additive(seed in any::<u64>()) {
        let g = FgAbelianGroup::new(vec![2, 2]);
        let coeff = CoefficientModule::trivial(&g, 2, 1);
        let h2 = cohomology(&g, &coeff, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_cocycle(&g, &coeff, 2, &mut rng).unwrap();
        let b = random_cocycle(&g, &coeff, 2, &mut rng).unwrap();
        let ca = h2.class_of(&a).unwrap();
        let cb = h2.class_of(&b).unwrap();
        let sum: Vec<u64> = ca.iter().zip(&cb).zip(&h2.invariant_factors).map(|((x, y), f)| (x + y) % f).collect();
        prop_assert_eq!(h2.class_of(&a.add(&b)).unwrap(), sum);
    }
}

#[test]
fn cyclic_groups_in_odd_degree() {
    // H³(Z_n, T) = Z_n
    for n in 2..=5u64 {
        let g = FgAbelianGroup::cyclic(n);
        let h3 = cohomology(&g, &CoefficientModule::trivial(&g, n, 1), 3).unwrap();
        assert_eq!(h3.order(), Some(n), "Z_{n}");
    }
}

#[test]
fn torus_dimensions_follow_binomials() {
    for (r, n, dim) in [(2usize, 2usize, 1usize), (3, 2, 3), (4, 2, 6), (3, 3, 1)] {
        let g = FgAbelianGroup::new(vec![0; r]);
        let h = cohomology(&g, &CoefficientModule::trivial(&g, 1, 1), n).unwrap();
        assert_eq!(h.torus_dimension, dim, "Z^{r} degree {n}");
    }
}

#[test]
fn swap_module_over_two_blocks() {
    let g = FgAbelianGroup::new(vec![2, 2]);
    let coeff = CoefficientModule::from_generators(&g, 2, 2, vec![vec![1, 0], vec![0, 1]]).unwrap();
    let zero = Cochain::zero(4, 2, 2, 2);
    assert!(is_coboundary(&g, &coeff, &zero).unwrap().is_some());
    let h3 = cohomology(&g, &coeff, 3).unwrap();
    assert!(!h3.is_trivial_group());
}
