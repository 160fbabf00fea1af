use freeact_core::assemble::{build, freeness, involution_checks};
use freeact_core::cohomology::{bicharacter, differential, random_cochain, random_cocycle};
use freeact_core::factorsys::{obstruction, FactorSystem, PicHomomorphism, RawFamily};
use freeact_core::fdcstar::{FdCStarAlgebra, PicardElement};
use freeact_core::groups::FgAbelianGroup;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn swap_phi() -> PicHomomorphism {
    let g = FgAbelianGroup::new(vec![2, 2]);
    let alg = FdCStarAlgebra::new(vec![1, 1], 1).unwrap();
    PicHomomorphism::new(&g, &alg, vec![PicardElement::new(vec![1, 0]).unwrap(), PicardElement::identity(2)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn twisted_systems_are_free_and_involutive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = swap_phi();
        let w = random_cocycle(phi.group(), &phi.coefficient_module(4), 2, &mut rng).unwrap();
        let fs = FactorSystem::canonical(&phi, 4).unwrap().twist(&w).unwrap();
        let sys = build(&fs).unwrap();
        let f = freeness(&sys);
        prop_assert!(f.free() && f.agree());
        prop_assert!(involution_checks(&sys).all_hold());
    }

    #[test]
    fn obstruction_is_the_bar_differential(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = swap_phi();
        let coeff = phi.coefficient_module(3);
        let delta = random_cochain(phi.group(), &coeff, 2, &mut rng);
        let ob = obstruction(&RawFamily::new(&phi, delta.clone()).unwrap()).unwrap();
        prop_assert!(ob.is_cocycle);
        prop_assert_eq!(ob.cochain, differential(phi.group(), &coeff, &delta).unwrap());
    }

    #[test]
    fn coboundary_twists_are_equivalent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = swap_phi();
        let coeff = phi.coefficient_module(4);
        let h = random_cochain(phi.group(), &coeff, 1, &mut rng);
        let dh = differential(phi.group(), &coeff, &h).unwrap();
        let fs = FactorSystem::canonical(&phi, 4).unwrap();
        let other = fs.twist(&dh).unwrap();
        let w = fs.equivalent(&other).unwrap().expect("coboundary twists are equivalent");
        prop_assert!(fs.verify_transport(&other, &w).unwrap());
    }
}

#[test]
fn pauli_is_inequivalent_to_the_canonical_system() {
    let g = FgAbelianGroup::new(vec![2, 2]);
    let phi = PicHomomorphism::trivial(&g, &FdCStarAlgebra::new(vec![1], 1).unwrap());
    let fs = FactorSystem::canonical(&phi, 2).unwrap();
    let pauli = fs.twist(&bicharacter(&g, 1, 2, &[vec![0, 1], vec![0, 0]]).unwrap()).unwrap();
    assert_eq!(fs.equivalent(&pauli).unwrap(), None);
    assert!(build(&pauli).unwrap().simplicity().simple);
}
