//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use freeact_cli::{execute, Cli};
use freeact_core::assemble::{
    build, extract_factor_system, freeness, from_action, gns_checks, involution_checks, permutation_matrix,
    same_structure, DynamicalSystem, RawAlgebra,
};
use freeact_core::bundles::{gelfand_round_trip, realize_bundle};
use freeact_core::cohomology::{
    bicharacter, cohomology, differential, is_coboundary, random_cochain, random_cocycle, stabilized_cohomology,
    CoefficientModule,
};
use freeact_core::factorsys::{obstruction, FactorSystem, PicHomomorphism, RawFamily};
use freeact_core::fdcstar::{FdCStarAlgebra, PicardElement};
use freeact_core::groups::FgAbelianGroup;
use freeact_core::linalg::SparseVec;
use freeact_core::sysops::{diagonal_generators, quotient, restrict, tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run_cli(args: &[&str]) -> Result<Value, String> {
    let cli = Cli::try_parse_from(std::iter::once("freeact").chain(args.iter().copied())).map_err(err)?;
    let report = execute(&cli).map_err(err)?;
    ensure!(report.invariant_violations.is_empty(), "invariant violations: {:?}", report.invariant_violations);
    serde_json::from_str(&report.to_json()).map_err(err)
}

fn scalar_phi(g: &FgAbelianGroup) -> PicHomomorphism {
    PicHomomorphism::trivial(g, &FdCStarAlgebra::new(vec![1], 1).unwrap())
}

fn pauli() -> FactorSystem {
    let g = FgAbelianGroup::new(vec![2, 2]);
    let omega = bicharacter(&g, 1, 2, &[vec![0, 1], vec![0, 0]]).unwrap();
    FactorSystem::new(&scalar_phi(&g), omega).unwrap()
}

fn nc_torus(q: u64, p: i64) -> FactorSystem {
    let g = FgAbelianGroup::new(vec![q, q]);
    let omega = bicharacter(&g, 1, q, &[vec![0, p], vec![0, 0]]).unwrap();
    FactorSystem::new(&scalar_phi(&g), omega).unwrap()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn c1() -> Outcome {
    let mut dims = Vec::new();
    for n in 2..=4 {
        let g = FgAbelianGroup::new(vec![0; n]);
        let h2 = cohomology(&g, &CoefficientModule::trivial(&g, 2, 1), 2).map_err(err)?;
        ensure!(h2.invariant_factors.is_empty(), "Z^{n}: unexpected torsion {:?}", h2.invariant_factors);
        ensure!(h2.torus_dimension == binomial(n, 2), "Z^{n}: torus dimension {}", h2.torus_dimension);
        dims.push(h2.torus_dimension);
    }
    Ok(format!("H²(Z^n, T) torus dimensions {dims:?}"))
}

fn c2() -> Outcome {
    let g = FgAbelianGroup::new(vec![0]);
    let alg = FdCStarAlgebra::new(vec![2, 2], 1).unwrap();
    let swap = PicHomomorphism::new(&g, &alg, vec![PicardElement::new(vec![1, 0]).unwrap()]).map_err(err)?;
    for phi in [swap, PicHomomorphism::trivial(&g, &alg)] {
        let coeff = phi.coefficient_module(2);
        for n in [2, 3] {
            let h = cohomology(&g, &coeff, n).map_err(err)?;
            ensure!(h.is_trivial_group(), "H^{n} nontrivial: {}", h.description);
        }
    }
    let path = config("swap_z.toml");
    let json = run_cli(&["--no-cache", "--config", path.to_str().unwrap(), "classify"])?;
    let count = &json["verdicts"]["class_count"];
    ensure!(count == 1, "classify reported class_count {count}");
    Ok("H² = H³ = 0 for swap and trivial actions; one isomorphism class".into())
}

/// Check that the Pauli system is `M_2` with `e_(1,0) ↦ X` and `e_(0,1) ↦ Z`.
fn pauli_is_m2(sys: &DynamicalSystem) -> bool {
    type C = (f64, f64);
    type M = [[C; 2]; 2];
    let mul = |a: &M, b: &M| -> M {
        let mut out = [[(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let (x, y) = (a[i][k], b[k][j]);
                    out[i][j].0 += x.0 * y.0 - x.1 * y.1;
                    out[i][j].1 += x.0 * y.1 + x.1 * y.0;
                }
            }
        }
        out
    };
    let scale = |c: C, a: &M| -> M { a.map(|r| r.map(|x| (c.0 * x.0 - c.1 * x.1, c.0 * x.1 + c.1 * x.0))) };
    let add = |a: &M, b: &M| -> M {
        let mut out = *a;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j].0 += b[i][j].0;
                out[i][j].1 += b[i][j].1;
            }
        }
        out
    };
    let close = |a: &M, b: &M| (0..2).all(|i| (0..2).all(|j| (a[i][j].0 - b[i][j].0).abs() + (a[i][j].1 - b[i][j].1).abs() < 1e-9));
    let adjoint = |a: &M| -> M {
        let mut out = [[(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (a[j][i].0, -a[j][i].1);
            }
        }
        out
    };

    let g = sys.group();
    let k = |c: [i64; 2]| sys.basis_of_degree(g.index_of(&c))[0];
    let (k0, kx, kz, kxz) = (k([0, 0]), k([1, 0]), k([0, 1]), k([1, 1]));
    let one = (1.0, 0.0);
    let zero = (0.0, 0.0);
    let x: M = [[zero, one], [one, zero]];
    let z: M = [[one, zero], [zero, (-1.0, 0.0)]];
    // e_x e_z = c e_xz fixes the image of e_xz
    let Some(c) = sys.product_of_basis(kx, kz).get(&kxz).map(|s| s.approx()) else {
        return false;
    };
    let norm = c.0 * c.0 + c.1 * c.1;
    let xz = scale((c.0 / norm, -c.1 / norm), &mul(&x, &z));
    let mut img = vec![[[zero; 2]; 2]; 4];
    img[k0] = [[one, zero], [zero, one]];
    img[kx] = x;
    img[kz] = z;
    img[kxz] = xz;
    let image = |v: &SparseVec| v.iter().fold([[zero; 2]; 2], |acc, (j, s)| add(&acc, &scale(s.approx(), &img[*j])));
    (0..4).all(|a| {
        close(&image(&sys.star(&sys.basis_vec(a))), &adjoint(&img[a]))
            && (0..4).all(|b| close(&image(sys.product_of_basis(a, b)), &mul(&img[a], &img[b])))
    }) && image(sys.unit()) == img[k0]
}

fn c3() -> Outcome {
    let g = FgAbelianGroup::new(vec![2, 2]);
    let phi = scalar_phi(&g);
    let (h2, st) = stabilized_cohomology(&g, &phi.coefficient_module(2), 2).map_err(err)?;
    ensure!(h2.invariant_factors == vec![2], "H² at N=2 is {:?}", h2.invariant_factors);
    ensure!(st.agree && st.doubled == 4 && st.doubled_order == 2, "no stabilization: {st:?}");

    let path = config("klein_scalar.toml");
    let json = run_cli(&["--no-cache", "--config", path.to_str().unwrap(), "classify"])?;
    let v = &json["verdicts"];
    ensure!(v["class_count"] == 2, "class_count {}", v["class_count"]);
    ensure!(v["pairwise_inequivalent"] == true, "classes not pairwise inequivalent");

    let canonical = FactorSystem::canonical(&phi, 2).map_err(err)?;
    let p = pauli();
    ensure!(canonical.equivalent(&p).map_err(err)?.is_none(), "canonical and Pauli systems are equivalent");
    let bundle = realize_bundle(&canonical).map_err(err)?;
    ensure!(
        bundle.total_points() == 4 && bundle.free && bundle.base_points == 1 && bundle.is_principal(),
        "commutative class is not four free points over a point: {bundle:?}"
    );
    let sys = build(&p).map_err(err)?;
    let simp = sys.simplicity();
    ensure!(sys.dim() == 4 && simp.simple && simp.center_dim == 1, "Pauli system: dim {} {simp:?}", sys.dim());
    ensure!(pauli_is_m2(&sys), "Pauli basis does not realize M_2");
    ensure!(realize_bundle(&p).is_err(), "noncommutative class was realized as a space");
    Ok("H² = Z_2 stable at N=4; functions on 4 points and M_2 are the two classes".into())
}

fn c4() -> Outcome {
    for (q, p) in [(2u64, 1i64), (3, 1), (3, 2)] {
        let sys = build(&nc_torus(q, p)).map_err(err)?;
        let s = sys.simplicity();
        ensure!(s.simple && s.center_dim == 1, "q={q} p={p}: {s:?}");
        ensure!(sys.dim() as u64 == q * q, "q={q}: dim {}", sys.dim());
    }
    let sys = build(&nc_torus(4, 2)).map_err(err)?;
    let s = sys.simplicity();
    ensure!(!s.simple && s.center_dim == 4, "q=4 p=2: {s:?}");
    Ok("coprime tori are simple of dimension q²; q=4, p=2 has center of dimension 4".into())
}

fn random_swap_phi<R: Rng>(g: &FgAbelianGroup, alg: &FdCStarAlgebra, rng: &mut R) -> PicHomomorphism {
    let images = g
        .factors()
        .iter()
        .map(|&f| {
            if alg.block_count() == 2 && f % 2 == 0 && rng.gen_bool(0.5) {
                PicardElement::new(vec![1, 0]).unwrap()
            } else {
                PicardElement::identity(alg.block_count())
            }
        })
        .collect();
    PicHomomorphism::new(g, alg, images).unwrap()
}

fn c5(collected: &mut Vec<DynamicalSystem>) -> Outcome {
    let groups = [vec![2], vec![3], vec![2, 2], vec![4]];
    let bases = [vec![1], vec![1, 1], vec![2], vec![2, 2]];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut count = 0;
    for round in 0..4 {
        for gf in &groups {
            for b in &bases {
                let g = FgAbelianGroup::new(gf.clone());
                let alg = FdCStarAlgebra::new(b.clone(), 1).unwrap();
                let phi = random_swap_phi(&g, &alg, &mut rng);
                let n = g.exponent();
                let w = random_cocycle(&g, &phi.coefficient_module(n), 2, &mut rng).map_err(err)?;
                let fs = FactorSystem::canonical(&phi, n).map_err(err)?.twist(&w).map_err(err)?;
                let sys = build(&fs).map_err(err)?;
                let f = freeness(&sys);
                ensure!(f.agree() && f.free(), "group {gf:?} base {b:?}: {f:?}");
                if round == 0 {
                    collected.push(sys);
                }
                count += 1;
            }
        }
    }
    let z4 = FgAbelianGroup::new(vec![4]);
    let control = from_action(&z4, &RawAlgebra::functions(2, 1), &[permutation_matrix(&[1, 0], 1)]).map_err(err)?;
    let f = freeness(&control);
    ensure!(
        !f.isotypic_full && !f.ellwood_surjective && !f.crossed_full,
        "non-free control passed a criterion: {f:?}"
    );
    Ok(format!("{count} random systems free under all three criteria; the Z_4 → Z_2 control fails all three"))
}

fn c6(collected: &mut Vec<DynamicalSystem>) -> Outcome {
    let g = FgAbelianGroup::new(vec![2, 2]);
    let phi = PicHomomorphism::trivial(&g, &FdCStarAlgebra::new(vec![1, 1], 1).unwrap());
    let coeff = phi.coefficient_module(2);
    let (h2, st) = stabilized_cohomology(&g, &coeff, 2).map_err(err)?;
    ensure!(st.agree, "H² did not stabilize");
    let order = h2.order().unwrap() as usize;
    let canonical = FactorSystem::canonical(&phi, 2).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cocycles: Vec<_> = h2.enumerate_classes().iter().map(|c| h2.representative(c)).collect();
    for _ in 0..12 {
        cocycles.push(random_cocycle(&g, &coeff, 2, &mut rng).map_err(err)?);
    }
    let classes: Vec<Vec<u64>> = cocycles.iter().map(|w| h2.class_of(w)).collect::<Result<_, _>>().map_err(err)?;
    let twists: Vec<FactorSystem> = cocycles.iter().map(|w| canonical.twist(w)).collect::<Result<_, _>>().map_err(err)?;
    let mut reps: Vec<usize> = Vec::new();
    for (i, a) in twists.iter().enumerate() {
        for (j, b) in twists.iter().enumerate() {
            let eq = a.equivalent(b).map_err(err)?.is_some();
            ensure!(eq == (classes[i] == classes[j]), "equivalence of twists {i},{j} disagrees with H² classes");
        }
        if reps.iter().all(|&r| a.equivalent(&twists[r]).map_err(err).map(|w| w.is_none()).unwrap_or(false)) {
            reps.push(i);
        }
    }
    ensure!(reps.len() == order, "{} inequivalent twists but |H²| = {order}", reps.len());
    for &r in &reps {
        collected.push(build(&twists[r]).map_err(err)?);
    }
    Ok(format!("{} twists fall into |H²| = {order} classes; equivalence matrix is block-diagonal", twists.len()))
}

fn c7() -> Outcome {
    let g = FgAbelianGroup::new(vec![2, 2]);
    let alg = FdCStarAlgebra::new(vec![1, 1], 1).unwrap();
    let phi = PicHomomorphism::new(&g, &alg, vec![PicardElement::new(vec![1, 0]).unwrap(), PicardElement::identity(2)])
        .map_err(err)?;
    let coeff = phi.coefficient_module(4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..20 {
        let raw = RawFamily::new(&phi, random_cochain(&g, &coeff, 2, &mut rng)).map_err(err)?;
        let h = random_cochain(&g, &coeff, 2, &mut rng);
        let ob1 = obstruction(&raw).map_err(err)?;
        let ob2 = obstruction(&raw.rechoose(&h).map_err(err)?).map_err(err)?;
        for ob in [&ob1, &ob2] {
            ensure!(ob.is_cocycle, "family {i}: obstruction is not a cocycle");
            let d = differential(&g, &coeff, &ob.cochain).map_err(err)?;
            ensure!(d.is_zero(), "family {i}: d(obstruction) ≠ 0");
        }
        let diff = ob2.cochain.sub(&ob1.cochain);
        let w = is_coboundary(&g, &coeff, &diff).map_err(err)?.ok_or(format!("family {i}: change is not a coboundary"))?;
        let dw = differential(&g, &coeff.with_modulus(w.modulus), &w).map_err(err)?;
        ensure!(dw == diff.embed(w.modulus).map_err(err)?, "family {i}: witness does not bound the change");
    }
    Ok("20 raw families: rechoosing changes the obstruction by a witnessed coboundary".into())
}

fn c8(systems: &[DynamicalSystem]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (i, sys) in systems.iter().enumerate() {
        let inv = involution_checks(sys);
        ensure!(inv.all_hold(), "system {i}: {inv:?}");
        let gns = gns_checks(sys, &mut rng, 8);
        ensure!(gns.all_hold(), "system {i}: {gns:?}");
    }
    Ok(format!("involution and inner-product identities hold on {} systems", systems.len()))
}

fn c9(systems: &[DynamicalSystem]) -> Outcome {
    for (i, sys) in systems.iter().enumerate() {
        let fs = extract_factor_system(sys).map_err(err)?;
        let rebuilt = build(&fs).map_err(err)?;
        ensure!(same_structure(sys, &rebuilt), "system {i}: rebuilt structure differs");
    }
    let g = FgAbelianGroup::new(vec![2, 2]);
    let fs = FactorSystem::canonical(&scalar_phi(&g), 2).map_err(err)?;
    let bundle = realize_bundle(&fs).map_err(err)?;
    ensure!(gelfand_round_trip(&fs, &bundle).map_err(err)?, "Gelfand round trip failed");
    Ok(format!("extract and rebuild agree on {} systems; Gelfand round trip succeeds", systems.len()))
}

fn c10() -> Outcome {
    let p = build(&pauli()).map_err(err)?;
    let r = restrict(&p, &diagonal_generators(&FgAbelianGroup::cyclic(2))).map_err(err)?;
    ensure!(r.report.target.free && r.system.fixed_dim() == 2, "diagonal restriction: {:?}", r.report.target);
    let z4 = FgAbelianGroup::cyclic(4);
    let d = build(&FactorSystem::canonical(&scalar_phi(&z4), 4).map_err(err)?).map_err(err)?;
    let q = quotient(&d, &[vec![2]]).map_err(err)?;
    ensure!(
        q.report.target.free && q.system.dim() == 2 && q.system.group().size() == 2,
        "quotient: {:?}",
        q.report.target
    );
    let t = tensor(&p, &p).map_err(err)?;
    ensure!(t.report.target.free && t.system.dim() == 16, "tensor: {:?}", t.report.target);
    Ok("diagonal restriction, Z_4 quotient and Pauli ⊗ Pauli are all free".into())
}

fn main() -> ExitCode {
    let g = FgAbelianGroup::new(vec![2, 2]);
    let mut systems = vec![
        build(&FactorSystem::canonical(&scalar_phi(&g), 2).unwrap()).unwrap(),
        build(&pauli()).unwrap(),
        build(&nc_torus(3, 1)).unwrap(),
        build(&nc_torus(4, 2)).unwrap(),
    ];
    let mut results: Vec<(&str, Outcome)> = vec![("C1", c1()), ("C2", c2()), ("C3", c3()), ("C4", c4())];
    results.push(("C5", c5(&mut systems)));
    results.push(("C6", c6(&mut systems)));
    results.push(("C7", c7()));
    results.push(("C8", c8(&systems)));
    results.push(("C9", c9(&systems)));
    results.push(("C10", c10()));
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("{name} PASS  {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{name} FAIL  {msg}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
