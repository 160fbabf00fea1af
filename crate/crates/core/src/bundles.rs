//! Factor systems over the functions on a finite set `X`: the flip cocycle, the secondary
//! class `χ₂`, and realization of commutative total algebras as free finite `G`-sets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assemble::{build, from_action_with_basis, is_equivariant_isomorphism, permutation_matrix, DynamicalSystem, RawAlgebra};
use crate::cohomology::{
    differential, is_coboundary, random_cocycle, split_h2, stabilized_cohomology, Cochain,
};
use crate::error::{Error, Result};
use crate::factorsys::{characteristic_class, FactorSystem, PicHomomorphism};
use crate::fdcstar::FdCStarAlgebra;
use crate::linalg::{sparse, Matrix, SparseVec};
use crate::scalars::CyclotomicScalar as S;

/// A finite set of points, standing for the algebra of functions on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSpace {
    points: usize,
}

impl FiniteSpace {
    pub fn new(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidInput("a finite space needs at least one point".into()));
        }
        Ok(FiniteSpace { points })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Functions on the points: one block of size 1 per point.
    pub fn algebra(&self, order: u32) -> FdCStarAlgebra {
        FdCStarAlgebra::new(vec![1; self.points], order).expect("blocks of size 1 are valid")
    }

    pub fn of_algebra(b: &FdCStarAlgebra) -> Result<Self> {
        if !b.is_commutative() {
            return Err(Error::NotCommutativeBase);
        }
        Self::new(b.block_count())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipCocycle {
    pub cochain: Cochain,
    pub antisymmetric: bool,
    pub closed: bool,
}

impl FlipCocycle {
    pub fn is_zero(&self) -> bool {
        self.cochain.is_zero()
    }
}

fn require_points(b: &FdCStarAlgebra) -> Result<()> {
    if b.is_commutative() {
        Ok(())
    } else {
        Err(Error::NotCommutativeBase)
    }
}

fn require_trivial(phi: &PicHomomorphism) -> Result<()> {
    if phi.is_trivial() {
        Ok(())
    } else {
        Err(Error::UnsupportedAction("φ permutes the points of X".into()))
    }
}

/// `C(π,ρ) = ω(π,ρ) − ω(ρ,π)` pointwise.
///
/// The flip `x ⊗ y ↦ y ⊗ x` is a bimodule map only when left and right actions agree on
/// every `M_π`, i.e. when `φ` fixes every point; other `φ` are refused.
pub fn flip_cocycle(fs: &FactorSystem) -> Result<FlipCocycle> {
    require_points(fs.algebra())?;
    require_trivial(fs.phi())?;
    let group = fs.group();
    let omega = fs.omega();
    let m = omega.modulus as i64;
    let c = Cochain::from_fn(group.size(), 2, omega.blocks, omega.modulus, |a| {
        omega.get(&[a[0], a[1]]).iter().zip(omega.get(&[a[1], a[0]])).map(|(&x, &y)| (x as i64 - y as i64).rem_euclid(m)).collect()
    });
    let g = group.size();
    let antisymmetric = (0..g).all(|p| {
        (0..g).all(|r| c.get(&[p, r]).iter().zip(c.get(&[r, p])).all(|(&x, &y)| (x + y) % omega.modulus == 0))
    });
    let closed = differential(group, &fs.coefficient_module(), &c)?.is_zero();
    Ok(FlipCocycle { cochain: c, antisymmetric, closed })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondaryClass {
    pub truncation: u64,
    /// `pr_ab` of the flip cocycle of the canonical system.
    pub representative: Cochain,
    pub trivial: bool,
    /// `h` with `dh = pr_ab(C)` when trivial.
    pub certificate: Option<Cochain>,
    /// The class recomputed from a randomly twisted system coincides.
    pub cross_check_agrees: bool,
}

/// `χ₂(φ) = pr_ab([C])`, computed from the canonical system and cross-checked against a
/// random twist of it.
pub fn secondary_class(phi: &PicHomomorphism, truncation: u64, seed: u64) -> Result<SecondaryClass> {
    require_points(phi.algebra())?;
    require_trivial(phi)?;
    let group = phi.group();
    let coeff = phi.coefficient_module(truncation);
    let split = split_h2(group, &coeff)?;
    let fs = FactorSystem::canonical(phi, truncation)?;
    let rep = split.pr_ab(&flip_cocycle(&fs)?.cochain);
    let certificate = is_coboundary(group, &coeff, &rep)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let twist = random_cocycle(group, &coeff, 2, &mut rng)?;
    let other = split.pr_ab(&flip_cocycle(&fs.twist(&twist)?)?.cochain);
    let cross_check_agrees = is_coboundary(group, &coeff, &rep.sub(&other))?.is_some();
    Ok(SecondaryClass { truncation, representative: rep, trivial: certificate.is_some(), certificate, cross_check_agrees })
}

/// The total space of a commutative system as an explicit free `G`-set over `X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleReport {
    pub chi_trivial: bool,
    /// `None` when `φ` moves points, where `χ₂` is not defined.
    pub chi2_trivial: Option<bool>,
    /// Scalars are expressed in `ζ_order`.
    pub order: u32,
    /// Point `p` as the character values `χ_p(e_k)` on the homogeneous basis: `None` for 0,
    /// otherwise the exponent of `ζ_order`.
    pub points: Vec<Vec<Option<u64>>>,
    /// `action[g][p] = g·p`, with `(g·χ)(x) = χ(α_g^{-1}(x))`.
    pub action: Vec<Vec<usize>>,
    /// The point of `X` below each point of `P`.
    pub quotient: Vec<usize>,
    pub free: bool,
    pub orbit_count: usize,
    pub base_points: usize,
    /// Every fibre of the quotient map is a single orbit.
    pub fibres_are_orbits: bool,
}

impl BundleReport {
    pub fn total_points(&self) -> usize {
        self.points.len()
    }

    /// Free, with orbit space identified with `X`.
    pub fn is_principal(&self) -> bool {
        self.free && self.orbit_count == self.base_points && self.fibres_are_orbits
    }
}

/// Characters of a commutative system by simultaneous diagonalization of the
/// multiplication operators over `ζ_order`. Entry `[p][k]` is `χ_p(e_k)`.
pub fn characters(sys: &DynamicalSystem) -> Result<Vec<Vec<S>>> {
    if !sys.is_commutative() {
        return Err(Error::NotCommutative);
    }
    let d = sys.dim();
    let order = sys.order();
    let ops: Vec<Matrix> = (0..d)
        .map(|k| {
            let mut m = Matrix::zeros(d, d, order);
            for l in 0..d {
                for (&j, c) in sys.product_of_basis(k, l) {
                    m.set(j, l, c.clone());
                }
            }
            m
        })
        .collect();
    let mut candidates = vec![S::zero(order)];
    candidates.extend((0..order as i64).map(|k| S::root(order, k)));
    // each subspace is a list of column vectors spanning a joint eigenspace
    let mut spaces: Vec<Vec<Vec<S>>> = vec![(0..d).map(|k| Matrix::identity(d, order).column(k)).collect()];
    for op in &ops {
        let mut next = Vec::new();
        for w in spaces {
            if w.len() == 1 {
                next.push(w);
                continue;
            }
            let wm = Matrix::from_fn(d, w.len(), order, |i, j| w[j][i].clone());
            let lw = op.mul(&wm);
            let mut found = 0;
            for c in &candidates {
                let shifted = lw.sub(&wm.scale(c));
                let ker = shifted.kernel();
                if ker.is_empty() {
                    continue;
                }
                found += ker.len();
                next.push(ker.iter().map(|coef| wm.mul_vec(coef)).collect());
            }
            if found != w.len() {
                return Err(Error::SolveFailed(format!("multiplication operator is not diagonalizable over ζ_{order}")));
            }
        }
        spaces = next;
    }
    if spaces.iter().any(|w| w.len() != 1) {
        return Err(Error::SolveFailed("joint eigenspaces are not one-dimensional".into()));
    }
    spaces
        .iter()
        .map(|w| {
            let v = &w[0];
            let j = v.iter().position(|x| !x.is_zero()).expect("eigenvectors are nonzero");
            let inv = v[j].inv()?;
            Ok(ops.iter().map(|op| &op.mul_vec(v)[j] * &inv).collect())
        })
        .collect()
}

fn exponent_of(c: &S, order: u32) -> Result<Option<u64>> {
    if c.is_zero() {
        return Ok(None);
    }
    let r = c.to_root_of_unity().ok_or_else(|| Error::SolveFailed("character value is not a root of unity".into()))?;
    Ok(Some(r.exponent_at(order as u64)?))
}

/// The factor system rewritten over a scalar field containing all character values.
fn promoted(fs: &FactorSystem) -> Result<FactorSystem> {
    let need = fs.modulus() * fs.group().exponent();
    let order = num_integer::lcm(fs.algebra().order() as u64, need) as u32;
    FactorSystem::new(&fs.phi().with_algebra_order(order), fs.omega().clone())
}

/// Realize the total algebra of a commutative system as functions on a free `G`-set `P`.
pub fn realize_bundle(fs: &FactorSystem) -> Result<BundleReport> {
    require_points(fs.algebra())?;
    let chi2_trivial = if fs.phi().is_trivial() {
        if !flip_cocycle(fs)?.is_zero() {
            return Err(Error::NotCommutative);
        }
        Some(secondary_class(fs.phi(), fs.modulus(), 0)?.trivial)
    } else {
        None
    };
    let chi_trivial = characteristic_class(fs.phi())?.trivial;
    let sys = build(&promoted(fs)?)?;
    realize_system(&sys, chi_trivial, chi2_trivial)
}

fn realize_system(sys: &DynamicalSystem, chi_trivial: bool, chi2_trivial: Option<bool>) -> Result<BundleReport> {
    if !sys.is_commutative() {
        return Err(Error::NotCommutative);
    }
    let base = sys.base_model().ok_or_else(|| Error::InvalidInput("system has no block model of its base".into()))?;
    let order = sys.order();
    let chars = characters(sys)?;
    let mut points: Vec<Vec<Option<u64>>> =
        chars.iter().map(|c| c.iter().map(|x| exponent_of(x, order)).collect::<Result<_>>()).collect::<Result<_>>()?;
    points.sort();
    let x = base.blocks.len();
    let quotient: Vec<usize> = points
        .iter()
        .map(|p| {
            base.units.iter().find(|(k, _)| p[*k] == Some(0)).map(|(_, l)| l.block).ok_or_else(|| {
                Error::SolveFailed("character does not restrict to a point of X".into())
            })
        })
        .collect::<Result<_>>()?;
    let g = sys.group().size();
    let degrees = sys.degrees();
    let action: Vec<Vec<usize>> = (0..g)
        .map(|h| {
            points
                .iter()
                .map(|p| {
                    let moved: Vec<Option<u64>> = p
                        .iter()
                        .zip(degrees)
                        .map(|(v, &pi)| {
                            v.map(|e| {
                                let ph = sys.pair(pi, h).to_root_of_unity().unwrap().exponent_at(order as u64).unwrap();
                                (e + order as u64 - ph) % order as u64
                            })
                        })
                        .collect();
                    points
                        .iter()
                        .position(|q| *q == moved)
                        .ok_or_else(|| Error::SolveFailed("translated character is not a character".into()))
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let free = (1..g).all(|h| action[h].iter().enumerate().all(|(p, &q)| p != q));
    let mut orbit = vec![usize::MAX; points.len()];
    let mut orbit_count = 0;
    for p in 0..points.len() {
        if orbit[p] == usize::MAX {
            for row in &action {
                orbit[row[p]] = orbit_count;
            }
            orbit_count += 1;
        }
    }
    let fibres_are_orbits = (0..points.len()).all(|p| (0..points.len()).all(|q| (quotient[p] == quotient[q]) == (orbit[p] == orbit[q])));
    Ok(BundleReport {
        chi_trivial,
        chi2_trivial,
        order,
        points,
        action,
        quotient,
        free,
        orbit_count,
        base_points: x,
        fibres_are_orbits,
    })
}

/// Rebuild `(C(P), G)` from the report and check that the Gelfand transform
/// `x ↦ (p ↦ χ_p(x))` is a `G`-equivariant *-isomorphism from the system of `fs`.
pub fn gelfand_round_trip(fs: &FactorSystem, report: &BundleReport) -> Result<bool> {
    let sys = build(&promoted(fs)?)?;
    let group = sys.group().clone();
    let order = report.order;
    let n = report.points.len();
    let gens: Vec<Matrix> = (0..group.rank())
        .map(|j| permutation_matrix(&report.action[group.index_of(&group.generator(j))], order))
        .collect();
    let (cp, v) = from_action_with_basis(&group, &RawAlgebra::functions(n, order), &gens)?;
    let vinv = v.inverse().ok_or_else(|| Error::SolveFailed("singular change of basis".into()))?;
    let images: Vec<SparseVec> = (0..sys.dim())
        .map(|k| {
            let col: Vec<S> =
                report.points.iter().map(|p| p[k].map_or_else(|| S::zero(order), |e| S::root(order, e as i64))).collect();
            sparse(&vinv.mul_vec(&col))
        })
        .collect();
    Ok(is_equivariant_isomorphism(&sys, &cp, &images))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleClassification {
    pub truncation: u64,
    /// `|H²_ab|`: classes with vanishing alternating part.
    pub count: usize,
    /// `|H²|`, the number of free actions over the same data.
    pub total_free_count: u64,
    pub stabilized: bool,
    /// Class coordinates of each bundle, in the generators of `H²`.
    pub classes: Vec<Vec<u64>>,
    pub bundles: Vec<BundleReport>,
}

fn symmetric_classes(phi: &PicHomomorphism, truncation: u64) -> Result<(Vec<(Vec<u64>, Cochain)>, u64)> {
    let coeff = phi.coefficient_module(truncation);
    let (h2, _) = stabilized_cohomology(phi.group(), &coeff, 2)?;
    let split = split_h2(phi.group(), &coeff)?;
    let total = h2.order().expect("finite groups have finite H²");
    let classes = h2
        .enumerate_classes()
        .into_iter()
        .map(|c| {
            let rep = h2.representative(&c);
            (c, rep)
        })
        .filter(|(_, rep)| split.lambda(rep).is_zero())
        .collect();
    Ok((classes, total))
}

/// Principal `G`-bundles over `X` with the given `φ`, one realized bundle per class.
pub fn classify_bundles(space: &FiniteSpace, phi: &PicHomomorphism, truncation: u64) -> Result<BundleClassification> {
    if phi.algebra().blocks() != vec![1; space.points()].as_slice() {
        return Err(Error::InvalidInput("φ does not act on the functions on X".into()));
    }
    require_trivial(phi)?;
    let cc = characteristic_class(phi)?;
    if !cc.trivial {
        return Err(Error::Obstructed("characteristic class χ(φ) is nonzero".into()));
    }
    let sc = secondary_class(phi, truncation, 0)?;
    if !sc.trivial {
        return Err(Error::Obstructed("secondary class χ₂(φ) is nonzero".into()));
    }
    let (classes, total) = symmetric_classes(phi, truncation)?;
    let (doubled, _) = symmetric_classes(phi, 2 * truncation)?;
    if doubled.len() != classes.len() {
        return Err(Error::StabilizationFailed(format!(
            "{} symmetric classes at N={truncation} but {} at N={}",
            classes.len(),
            doubled.len(),
            2 * truncation
        )));
    }
    let canonical = FactorSystem::canonical(phi, truncation)?;
    let mut bundles = Vec::with_capacity(classes.len());
    for (c, rep) in &classes {
        let fs = canonical.twist(rep)?;
        let report = realize_bundle(&fs).map_err(|e| Error::Obstructed(format!("class {c:?}: {e}")))?;
        if !report.is_principal() {
            return Err(Error::Obstructed(format!("class {c:?}: realized action is not a principal bundle")));
        }
        bundles.push(report);
    }
    Ok(BundleClassification {
        truncation,
        count: classes.len(),
        total_free_count: total,
        stabilized: true,
        classes: classes.into_iter().map(|(c, _)| c).collect(),
        bundles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{bicharacter, CoefficientModule};
    use crate::fdcstar::PicardElement;
    use crate::groups::FgAbelianGroup;

    fn klein() -> FgAbelianGroup {
        FgAbelianGroup::new(vec![2, 2])
    }

    fn pauli() -> FactorSystem {
        let phi = PicHomomorphism::trivial(&klein(), &FiniteSpace::new(1).unwrap().algebra(1));
        let omega = bicharacter(&klein(), 1, 2, &[vec![0, 1], vec![0, 0]]).unwrap();
        FactorSystem::new(&phi, omega).unwrap()
    }

    #[test]
    fn flip_of_pauli_is_alternating() {
        let f = flip_cocycle(&pauli()).unwrap();
        assert!(f.antisymmetric && f.closed && !f.is_zero());
        let split = split_h2(&klein(), &CoefficientModule::trivial(&klein(), 2, 1)).unwrap();
        assert!(split.is_alternating_form(&f.cochain));
    }

    #[test]
    fn torsor_over_a_point() {
        let phi = PicHomomorphism::trivial(&klein(), &FiniteSpace::new(1).unwrap().algebra(1));
        let fs = FactorSystem::canonical(&phi, 2).unwrap();
        let r = realize_bundle(&fs).unwrap();
        assert_eq!(r.total_points(), 4);
        assert!(r.is_principal());
        assert!(gelfand_round_trip(&fs, &r).unwrap());
        assert_eq!(realize_bundle(&pauli()), Err(Error::NotCommutative));
    }

    #[test]
    fn swap_over_two_points_is_not_commutative() {
        let z2 = FgAbelianGroup::cyclic(2);
        let b = FiniteSpace::new(2).unwrap().algebra(1);
        let phi = PicHomomorphism::new(&z2, &b, vec![PicardElement::new(vec![1, 0]).unwrap()]).unwrap();
        let fs = FactorSystem::canonical(&phi, 2).unwrap();
        assert!(matches!(flip_cocycle(&fs), Err(Error::UnsupportedAction(_))));
        assert_eq!(realize_bundle(&fs), Err(Error::NotCommutative));
    }

    #[test]
    fn klein_bundles_over_a_point() {
        let x = FiniteSpace::new(1).unwrap();
        let phi = PicHomomorphism::trivial(&klein(), &x.algebra(1));
        let c = classify_bundles(&x, &phi, 2).unwrap();
        assert_eq!((c.count, c.total_free_count), (1, 2));
        assert!(c.bundles[0].is_principal());
    }

    #[test]
    fn bundles_over_two_points() {
        let z3 = FgAbelianGroup::cyclic(3);
        let x = FiniteSpace::new(2).unwrap();
        let phi = PicHomomorphism::trivial(&z3, &x.algebra(1));
        let fs = FactorSystem::canonical(&phi, 3).unwrap();
        let r = realize_bundle(&fs).unwrap();
        assert_eq!((r.total_points(), r.orbit_count), (6, 2));
        assert!(r.is_principal());
        assert!(gelfand_round_trip(&fs, &r).unwrap());
        let sc = secondary_class(&phi, 3, 5).unwrap();
        assert!(sc.trivial && sc.cross_check_agrees);
    }
}
