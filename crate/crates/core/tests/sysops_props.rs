use freeact_core::assemble::{build, from_action_with_basis, permutation_matrix, DynamicalSystem, RawAlgebra};
use freeact_core::cohomology::{bicharacter, random_cocycle};
use freeact_core::factorsys::{FactorSystem, PicHomomorphism};
use freeact_core::fdcstar::FdCStarAlgebra;
use freeact_core::groups::FgAbelianGroup;
use freeact_core::linalg::Matrix;
use freeact_core::sysops::{commuting_mix, quotient, restrict, tensor};
use freeact_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar_system(g: &FgAbelianGroup, seed: u64) -> DynamicalSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = PicHomomorphism::trivial(g, &FdCStarAlgebra::new(vec![1], 1).unwrap());
    let w = random_cocycle(g, &phi.coefficient_module(g.exponent()), 2, &mut rng).unwrap();
    build(&FactorSystem::canonical(&phi, g.exponent()).unwrap().twist(&w).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tensor_dimensions_multiply(a in 2u64..=3, b in 2u64..=3, s1 in any::<u64>(), s2 in any::<u64>()) {
        let d1 = scalar_system(&FgAbelianGroup::cyclic(a), s1);
        let d2 = scalar_system(&FgAbelianGroup::new(vec![b, b]), s2);
        let t = tensor(&d1, &d2).unwrap();
        prop_assert_eq!(t.system.dim(), d1.dim() * d2.dim());
        prop_assert_eq!(t.system.fixed_dim(), d1.fixed_dim() * d2.fixed_dim());
        prop_assert!(t.report.freeness_preserved && t.report.target.free);
    }

    #[test]
    fn restriction_and_quotient_preserve_freeness(seed in any::<u64>(), x in 0i64..2, y in 0i64..2) {
        let d = scalar_system(&FgAbelianGroup::new(vec![2, 2]), seed);
        let r = restrict(&d, &[vec![x, y]]).unwrap();
        prop_assert!(r.report.target.free);
        let q = quotient(&d, &[vec![x, y]]).unwrap();
        prop_assert!(q.report.target.free);
        prop_assert_eq!(q.system.dim() * r.system.group().size(), d.dim());
    }
}

#[test]
fn cyclic_quotient_keeps_the_even_part() {
    let d = scalar_system(&FgAbelianGroup::cyclic(4), 1);
    let q = quotient(&d, &[vec![2]]).unwrap();
    assert_eq!(q.system.group().factors(), &[2]);
    assert_eq!(q.system.dim(), 2);
    assert!(q.report.target.free);
}

/// Functions on `Z_2 × Z_2²` with `G = Z_2` and `H = Z_2²` translating the two factors,
/// mixed with the Pauli system on `C = M_2`.
#[test]
fn finite_connes_landi_analogue() {
    let g = FgAbelianGroup::cyclic(2);
    let h = FgAbelianGroup::new(vec![2, 2]);
    let point = |a: usize, b: usize, c: usize| a * 4 + b * 2 + c;
    let perm = |f: &dyn Fn(usize, usize, usize) -> usize| -> Vec<usize> {
        (0..8).map(|p| f(p / 4, (p / 2) % 2, p % 2)).collect()
    };
    let order = 2;
    let alpha = permutation_matrix(&perm(&|a, b, c| point(1 - a, b, c)), order);
    // β in the homogeneous basis: conjugate the point-mass matrices by the rebasing
    let (a2, v) = from_action_with_basis(&g, &RawAlgebra::functions(8, order), &[alpha]).unwrap();
    let vinv = v.inverse().unwrap();
    let beta: Vec<Matrix> = [perm(&|x, b, c| point(x, 1 - b, c)), perm(&|x, b, c| point(x, b, 1 - c))]
        .iter()
        .map(|p| vinv.mul(&permutation_matrix(p, v.order())).mul(&v))
        .collect();
    let phi = PicHomomorphism::trivial(&h, &FdCStarAlgebra::new(vec![1], 1).unwrap());
    let omega = bicharacter(&h, 1, 2, &[vec![0, 1], vec![0, 0]]).unwrap();
    let pauli = build(&FactorSystem::new(&phi, omega).unwrap()).unwrap();
    let mix = commuting_mix(&a2, &beta, &pauli).unwrap();
    assert_eq!(mix.product.system.dim(), 32);
    assert!(mix.product.report.target.free);
    assert_eq!(mix.fixed.system.group().size(), 2);
    assert_eq!(mix.fixed.system.dim(), 8);
    assert!(mix.fixed.report.target.free);
}

#[test]
fn non_commuting_actions_are_refused() {
    // α on C^4 ≅ functions on Z_4 by rotation, β by a reflection; they do not commute
    let g = FgAbelianGroup::cyclic(4);
    let alpha = permutation_matrix(&[1, 2, 3, 0], 4);
    let (a, v) = from_action_with_basis(&g, &RawAlgebra::functions(4, 4), &[alpha]).unwrap();
    let vinv = v.inverse().unwrap();
    let beta = vinv.mul(&permutation_matrix(&[0, 3, 2, 1], v.order())).mul(&v);
    let c = scalar_system(&FgAbelianGroup::cyclic(2), 0);
    assert!(matches!(commuting_mix(&a, &[beta], &c), Err(Error::ActionsDoNotCommute(_))));
}
