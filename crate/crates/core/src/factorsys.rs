//! Factor systems over a Picard homomorphism `φ: Ĝ → Pic(B)`.
//!
//! In the block model every multiplication isomorphism `Ψ_{π,ρ}: M_π ⊗ M_ρ → M_{π+ρ}` is
//! a central phase times the canonical one, so a factor system is the pair `(φ, ω)`:
//!
//! ```text
//! Ψ_{π,ρ}(x ⊗ y)_i = ζ_N^{ω(π,ρ)_i} · x_i y_{σ_π(i)}
//! ```
//!
//! Associativity of the assembled product is exactly the twisted cocycle identity
//! `σ_π·ω(ρ,τ) + ω(π,ρ+τ) = ω(π+ρ,τ) + ω(π,ρ)`.

use serde::{Deserialize, Serialize};

use crate::cohomology::{differential, is_coboundary, CoefficientModule, Cochain};
use crate::error::{Error, Result};
use crate::fdcstar::{AlgebraElement, BimoduleElement, EquivalenceBimodule, FdAutomorphism, FdCStarAlgebra, PicardElement};
use crate::groups::FgAbelianGroup;
use crate::linalg::Matrix;
use crate::scalars::CyclotomicScalar as S;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicHomomorphism {
    group: FgAbelianGroup,
    algebra: FdCStarAlgebra,
    images: Vec<PicardElement>,
}

impl PicHomomorphism {
    /// `images[i]` is the class of the `i`-th standard generator.
    pub fn new(group: &FgAbelianGroup, algebra: &FdCStarAlgebra, images: Vec<PicardElement>) -> Result<Self> {
        let s = algebra.block_count();
        if images.len() != group.rank() {
            return Err(Error::InvalidInput(format!("expected {} generator images, got {}", group.rank(), images.len())));
        }
        if images.iter().any(|p| p.perm.len() != s) {
            return Err(Error::MismatchedAlgebra);
        }
        // reuse the module validation: orders divide the relations, images commute
        CoefficientModule::from_generators(group, 1, s, images.iter().map(|p| p.perm.clone()).collect())?;
        Ok(PicHomomorphism { group: group.clone(), algebra: algebra.clone(), images })
    }

    pub fn trivial(group: &FgAbelianGroup, algebra: &FdCStarAlgebra) -> Self {
        let id = PicardElement::identity(algebra.block_count());
        PicHomomorphism { group: group.clone(), algebra: algebra.clone(), images: vec![id; group.rank()] }
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn algebra(&self) -> &FdCStarAlgebra {
        &self.algebra
    }

    pub fn generator_images(&self) -> &[PicardElement] {
        &self.images
    }

    pub fn with_algebra_order(&self, order: u32) -> Self {
        PicHomomorphism { algebra: self.algebra.with_order(order), ..self.clone() }
    }

    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(|p| p.is_identity())
    }

    /// `φ(π)` for `π` in coordinates.
    pub fn image(&self, coords: &[i64]) -> PicardElement {
        let c = self.group.reduce(coords);
        let mut acc = PicardElement::identity(self.algebra.block_count());
        for (g, &k) in self.images.iter().zip(&c) {
            let k = if k < 0 { g.inverse().pow((-k) as u64) } else { g.pow(k as u64) };
            acc = acc.then(&k);
        }
        acc
    }

    /// `φ(π)` for the element with lexicographic index `pi`.
    pub fn image_at(&self, pi: usize) -> PicardElement {
        self.image(&self.group.coords_of(pi))
    }

    /// `M_{φ(π)}`.
    pub fn bimodule(&self, pi: usize) -> EquivalenceBimodule {
        EquivalenceBimodule { algebra: self.algebra.clone(), sigma: self.image_at(pi) }
    }

    /// `UZ(B)` truncated to `μ_N^s` with the action `Φ∘φ`.
    pub fn coefficient_module(&self, n: u64) -> CoefficientModule {
        CoefficientModule::from_generators(&self.group, n, self.algebra.block_count(), self.images.iter().map(|p| p.perm.clone()).collect())
            .expect("validated at construction")
    }
}

/// Verdict of [`verify`]: which normalization entries and which triples fail.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub normalization_violations: Vec<(usize, usize)>,
    /// Triples `(π,ρ,τ)` by lexicographic index, in lexicographic order.
    pub cocycle_violations: Vec<(usize, usize, usize)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.normalization_violations.is_empty() && self.cocycle_violations.is_empty()
    }
}

/// Check normalization and the twisted cocycle identity over all triples.
pub fn verify(phi: &PicHomomorphism, omega: &Cochain) -> Result<VerifyReport> {
    check_shape(phi, omega, 2)?;
    let g = phi.group.size();
    let mut rep = VerifyReport::default();
    for a in 0..g {
        for b in 0..g {
            if (a == 0 || b == 0) && omega.get(&[a, b]).iter().any(|&v| v != 0) {
                rep.normalization_violations.push((a, b));
            }
        }
    }
    let coeff = phi.coefficient_module(omega.modulus);
    let d = differential(&phi.group, &coeff, omega)?;
    for t in 0..g * g * g {
        if d.values()[t * omega.blocks..(t + 1) * omega.blocks].iter().any(|&v| v != 0) {
            let args = d.args_of(t);
            rep.cocycle_violations.push((args[0], args[1], args[2]));
        }
    }
    Ok(rep)
}

fn check_shape(phi: &PicHomomorphism, c: &Cochain, degree: usize) -> Result<()> {
    if !phi.group.is_finite() {
        return Err(Error::InfiniteGroup);
    }
    if c.degree != degree || c.group_order != phi.group.size() || c.blocks != phi.algebra.block_count() {
        return Err(Error::InvalidInput(format!(
            "expected a degree-{degree} cochain on {} elements with {} blocks",
            phi.group.size(),
            phi.algebra.block_count()
        )));
    }
    Ok(())
}

/// `Ψ_{π,ρ}(x ⊗ y)` for a phase table `ω` (not necessarily a cocycle).
pub fn multiply_raw(
    phi: &PicHomomorphism,
    omega: &Cochain,
    pi: usize,
    x: &BimoduleElement,
    rho: usize,
    y: &BimoduleElement,
) -> BimoduleElement {
    let order = phi.algebra.order();
    let m = phi.bimodule(pi);
    let w = omega.get(&[pi, rho]);
    let f = order as u64 / omega.modulus;
    let prod = m.tensor_elements(x, y);
    BimoduleElement {
        comps: prod.comps.iter().enumerate().map(|(i, c)| c.scale(&S::root(order, (w[i] * f) as i64))).collect(),
    }
}

fn scalar_order_for(phi: &PicHomomorphism, modulus: u64) -> u32 {
    num_integer::lcm(phi.algebra.order(), modulus as u32)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSystem {
    phi: PicHomomorphism,
    omega: Cochain,
}

impl FactorSystem {
    /// Validates normalization and associativity. The algebra's scalar order is raised to
    /// contain `μ_N` if needed.
    pub fn new(phi: &PicHomomorphism, omega: Cochain) -> Result<Self> {
        let rep = verify(phi, &omega)?;
        if !rep.passed() {
            return Err(Error::NotAFactorSystem(describe(&rep)));
        }
        let phi = phi.with_algebra_order(scalar_order_for(phi, omega.modulus));
        Ok(FactorSystem { phi, omega })
    }

    /// The canonical system `ω = 0`.
    pub fn canonical(phi: &PicHomomorphism, modulus: u64) -> Result<Self> {
        if !phi.group.is_finite() {
            return Err(Error::InfiniteGroup);
        }
        let omega = Cochain::zero(phi.group.size(), 2, phi.algebra.block_count(), modulus.max(1));
        Self::new(phi, omega)
    }

    pub fn phi(&self) -> &PicHomomorphism {
        &self.phi
    }

    pub fn omega(&self) -> &Cochain {
        &self.omega
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.phi.group
    }

    pub fn algebra(&self) -> &FdCStarAlgebra {
        &self.phi.algebra
    }

    pub fn modulus(&self) -> u64 {
        self.omega.modulus
    }

    pub fn coefficient_module(&self) -> CoefficientModule {
        self.phi.coefficient_module(self.omega.modulus)
    }

    pub fn bimodule(&self, pi: usize) -> EquivalenceBimodule {
        self.phi.bimodule(pi)
    }

    pub fn multiply(&self, pi: usize, x: &BimoduleElement, rho: usize, y: &BimoduleElement) -> BimoduleElement {
        multiply_raw(&self.phi, &self.omega, pi, x, rho, y)
    }

    /// Rewrite `ω` at a finer truncation.
    pub fn at_modulus(&self, m: u64) -> Result<FactorSystem> {
        FactorSystem::new(&self.phi, self.omega.embed(m)?)
    }

    /// `Ψ' = ω'·Ψ`, i.e. deviation `ω + ω'`.
    pub fn twist(&self, omega2: &Cochain) -> Result<FactorSystem> {
        check_shape(&self.phi, omega2, 2)?;
        let m = num_integer::lcm(self.omega.modulus, omega2.modulus);
        let w2 = omega2.embed(m)?;
        let coeff = self.phi.coefficient_module(m);
        if !differential(&self.phi.group, &coeff, &w2)?.is_zero() || !w2.is_normalized() {
            return Err(Error::NotACocycle);
        }
        FactorSystem::new(&self.phi, self.omega.embed(m)?.add(&w2))
    }

    /// A witness `w` with `T_π = ζ^{w(π)}·` an equivalence `(M_π, Ψ) → (M_π, Ψ')`,
    /// i.e. `dw = ω − ω'`. `None` when the systems are inequivalent.
    pub fn equivalent(&self, other: &FactorSystem) -> Result<Option<Cochain>> {
        if self.phi.group != other.phi.group || self.phi.algebra.blocks() != other.phi.algebra.blocks() {
            return Err(Error::MismatchedAlgebra);
        }
        if self.phi.images != other.phi.images {
            return Ok(None);
        }
        let m = num_integer::lcm(self.omega.modulus, other.omega.modulus);
        let diff = self.omega.embed(m)?.sub(&other.omega.embed(m)?);
        is_coboundary(&self.phi.group, &self.phi.coefficient_module(m), &diff)
    }

    /// Check that `T_π = ζ^{w(π)}·` satisfies `T_{π+ρ}∘Ψ_{π,ρ} = Ψ'_{π,ρ}∘(T_π ⊗ T_ρ)` on basis tensors.
    pub fn verify_transport(&self, other: &FactorSystem, w: &Cochain) -> Result<bool> {
        let m = num_integer::lcm(num_integer::lcm(self.omega.modulus, other.omega.modulus), w.modulus);
        let a = self.at_modulus(m)?;
        let b = other.at_modulus(m)?;
        let w = w.embed(m)?;
        let order = scalar_order_for(&a.phi, m);
        let g = self.group().size();
        let add = self.group().add_table();
        let t = |pi: usize, x: &BimoduleElement| {
            let u = crate::fdcstar::CentralUnitary { modulus: m, exps: w.get(&[pi]).to_vec() };
            x.phase(&u, order)
        };
        for pi in 0..g {
            for rho in 0..g {
                let (mp, mr) = (a.bimodule(pi), a.bimodule(rho));
                for x in mp.basis() {
                    for y in mr.basis() {
                        let lhs = t(add[pi][rho], &a.multiply(pi, &x, rho, &y));
                        let rhs = b.multiply(pi, &t(pi, &x), rho, &t(rho, &y));
                        if lhs != rhs {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }
}

fn describe(rep: &VerifyReport) -> String {
    let mut parts = Vec::new();
    if !rep.normalization_violations.is_empty() {
        parts.push(format!("not normalized at {:?}", rep.normalization_violations));
    }
    if !rep.cocycle_violations.is_empty() {
        let shown: Vec<_> = rep.cocycle_violations.iter().take(8).collect();
        parts.push(format!("{} associativity violations, first {:?}", rep.cocycle_violations.len(), shown));
    }
    parts.join("; ")
}

/// A normalized phase family with no cocycle requirement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFamily {
    pub phi: PicHomomorphism,
    pub deviation: Cochain,
}

impl RawFamily {
    pub fn new(phi: &PicHomomorphism, deviation: Cochain) -> Result<Self> {
        check_shape(phi, &deviation, 2)?;
        if !deviation.is_normalized() {
            return Err(Error::InvalidInput("raw family must be normalized".into()));
        }
        let phi = phi.with_algebra_order(scalar_order_for(phi, deviation.modulus));
        Ok(RawFamily { phi, deviation })
    }

    pub fn canonical(phi: &PicHomomorphism, modulus: u64) -> Result<Self> {
        if !phi.group.is_finite() {
            return Err(Error::InfiniteGroup);
        }
        Self::new(phi, Cochain::zero(phi.group.size(), 2, phi.algebra.block_count(), modulus))
    }

    /// Replace every `Ψ_{π,ρ}` by `ζ^{h(π,ρ)}Ψ_{π,ρ}`.
    pub fn rechoose(&self, h: &Cochain) -> Result<RawFamily> {
        let m = num_integer::lcm(self.deviation.modulus, h.modulus);
        RawFamily::new(&self.phi, self.deviation.embed(m)?.add(&h.embed(m)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obstruction {
    /// `d_MΨ` in exponent form.
    pub cochain: Cochain,
    pub is_cocycle: bool,
    pub is_factor_system: bool,
}

/// The 3-cochain measuring non-associativity: `x(yz) = ζ^{d(π,ρ,τ)}·(xy)z`.
///
/// Computed from actual bimodule products on matrix units, independently of the
/// bar differential.
pub fn obstruction(raw: &RawFamily) -> Result<Obstruction> {
    let phi = &raw.phi;
    let g = phi.group.size();
    let s = phi.algebra.block_count();
    let order = phi.algebra.order();
    let m = raw.deviation.modulus;
    let add = phi.group.add_table();
    let unit_in = |pi: usize, i: usize| -> BimoduleElement {
        let bm = phi.bimodule(pi);
        let mut z = bm.zero();
        let (r, c) = (z.comps[i].rows, z.comps[i].cols);
        z.comps[i] = Matrix::unit(r, c, 0, 0, order);
        z
    };
    let mut d = Cochain::zero(g, 3, s, m);
    for p in 0..g {
        for r in 0..g {
            for t in 0..g {
                let sp = phi.image_at(p);
                let spr = phi.image_at(add[p][r]);
                let mut v = Vec::with_capacity(s);
                for i in 0..s {
                    let x = unit_in(p, i);
                    let y = unit_in(r, sp.perm[i]);
                    let z = unit_in(t, spr.perm[i]);
                    let left = multiply_raw(phi, &raw.deviation, add[p][r], &multiply_raw(phi, &raw.deviation, p, &x, r, &y), t, &z);
                    let right = multiply_raw(phi, &raw.deviation, p, &x, add[r][t], &multiply_raw(phi, &raw.deviation, r, &y, t, &z));
                    let ratio = (right.comps[i].get(0, 0).clone() * left.comps[i].get(0, 0).inv()?).to_root_of_unity();
                    let ratio = ratio.ok_or_else(|| Error::InvalidInput("phase ratio is not a root of unity".into()))?;
                    v.push(ratio.exponent_at(m)? as i64);
                }
                d.set(&[p, r, t], &v);
            }
        }
    }
    let coeff = phi.coefficient_module(m);
    let is_cocycle = differential(&phi.group, &coeff, &d)?.is_zero();
    Ok(Obstruction { is_factor_system: d.is_zero(), cochain: d, is_cocycle })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacteristicClass {
    pub obstruction: Cochain,
    pub trivial: bool,
    /// `h` with `dh = d_MΨ` in circle coefficients.
    pub certificate: Option<Cochain>,
}

/// Whether a 3-cocycle is trivial in `H³_φ(Ĝ, UZ(B))`.
pub fn class_verdict(phi: &PicHomomorphism, c: &Cochain) -> Result<CharacteristicClass> {
    check_shape(phi, c, 3)?;
    let cert = is_coboundary(&phi.group, &phi.coefficient_module(c.modulus), c)?;
    Ok(CharacteristicClass { obstruction: c.clone(), trivial: cert.is_some(), certificate: cert })
}

/// `χ(φ)` from the canonical raw family.
pub fn characteristic_class(phi: &PicHomomorphism) -> Result<CharacteristicClass> {
    characteristic_class_of(&RawFamily::canonical(phi, 1)?)
}

/// `χ(φ)` computed from a user-supplied raw family over `φ`.
pub fn characteristic_class_of(raw: &RawFamily) -> Result<CharacteristicClass> {
    let ob = obstruction(raw)?;
    class_verdict(&raw.phi, &ob.cochain)
}

/// A pair `(S, ω)`: automorphisms `S(π)` and unitaries `ω(π,ρ)` of `B`.
#[derive(Clone, Debug)]
pub struct SOmegaPair {
    pub group: FgAbelianGroup,
    pub algebra: FdCStarAlgebra,
    /// Indexed by group element.
    pub s: Vec<FdAutomorphism>,
    /// Indexed by `π·|Ĝ| + ρ`.
    pub omega: Vec<AlgebraElement>,
}

impl SOmegaPair {
    fn omega_at(&self, p: usize, r: usize) -> &AlgebraElement {
        &self.omega[p * self.group.size() + r]
    }

    /// Violations of relations I and II, labelled.
    pub fn relation_violations(&self) -> Vec<String> {
        let g = self.group.size();
        let add = self.group.add_table();
        let basis = self.algebra.basis();
        let mut out = Vec::new();
        if !self.s[0].tau.is_identity() || self.s[0].unitaries.iter().any(|u| *u != Matrix::identity(u.rows, u.order())) {
            out.push("S(0) is not the identity".to_string());
        }
        for p in 0..g {
            for r in 0..g {
                for t in 0..g {
                    let lhs = self.s[p].apply(self.omega_at(r, t)).mul(self.omega_at(p, add[r][t]));
                    let rhs = self.omega_at(add[p][r], t).mul(self.omega_at(p, r));
                    if lhs != rhs {
                        out.push(format!("I({p},{r},{t})"));
                    }
                }
                let w = self.omega_at(p, r);
                for (k, b) in basis.iter().enumerate() {
                    let lhs = self.s[p].apply(&self.s[r].apply(b));
                    let rhs = w.mul(&self.s[add[p][r]].apply(b)).mul(&w.adjoint());
                    if lhs != rhs {
                        out.push(format!("II({p},{r};e{k})"));
                        break;
                    }
                }
            }
        }
        out
    }

    /// `φ(π) = [M_{S(π)}]`.
    pub fn picard(&self) -> Result<PicHomomorphism> {
        let gens: Vec<PicardElement> =
            (0..self.group.rank()).map(|i| self.s[self.group.index_of(&self.group.generator(i))].tau.clone()).collect();
        PicHomomorphism::new(&self.group, &self.algebra, gens)
    }

    /// `Θ_π(b)_i = b_i U^π_i`, from `B u_π` into the block model.
    pub fn transport(&self, pi: usize, b: &AlgebraElement) -> BimoduleElement {
        self.s[pi].to_picard().theta(b)
    }
}

/// The block-model factor system with `Ψ_{π,ρ}(b ⊗ b') = b S(π)(b') ω(π,ρ)` transported
/// along `Θ`.
pub fn from_s_omega(p: &SOmegaPair) -> Result<FactorSystem> {
    let v = p.relation_violations();
    if !v.is_empty() {
        return Err(Error::RelationViolated(v));
    }
    let phi = p.picard()?;
    let g = p.group.size();
    let s = p.algebra.block_count();
    let add = p.group.add_table();
    // phases c with U^π_i U^ρ_{τπ(i)} c_i = ω(π,ρ)_i U^{π+ρ}_i
    let mut roots = Vec::with_capacity(g * g * s);
    for a in 0..g {
        for b in 0..g {
            let (sa, sb, sab) = (&p.s[a], &p.s[b], &p.s[add[a][b]]);
            for i in 0..s {
                let v = sa.unitaries[i].mul(&sb.unitaries[sa.tau.perm[i]]);
                let w = p.omega_at(a, b).blocks[i].mul(&sab.unitaries[i]);
                let (r, c) = (0..v.rows)
                    .flat_map(|r| (0..v.cols).map(move |c| (r, c)))
                    .find(|&(r, c)| !v.get(r, c).is_zero())
                    .expect("unitary has a nonzero entry");
                let ph = w.get(r, c).clone() * v.get(r, c).inv()?;
                if v.scale(&ph) != w {
                    return Err(Error::RelationViolated(vec![format!("II({a},{b}) phase in block {i}")]));
                }
                let root = ph
                    .to_root_of_unity()
                    .ok_or_else(|| Error::NotAFactorSystem(format!("phase {ph} at ({a},{b}) is not a root of unity")))?;
                roots.push(root);
            }
        }
    }
    let m = roots.iter().fold(1u64, |l, r| num_integer::lcm(l, r.order()));
    let vals = roots.iter().map(|r| r.exponent_at(m)).collect::<std::result::Result<Vec<_>, _>>()?;
    let omega = Cochain::from_values(g, 2, s, m, vals)?;
    let phi = phi.with_algebra_order(num_integer::lcm(p.algebra.order(), m as u32));
    FactorSystem::new(&phi, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{bicharacter, cohomology, random_cochain, random_cocycle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z2z2() -> FgAbelianGroup {
        FgAbelianGroup::new(vec![2, 2])
    }

    fn scalar_phi(g: &FgAbelianGroup) -> PicHomomorphism {
        PicHomomorphism::trivial(g, &FdCStarAlgebra::new(vec![1], 1).unwrap())
    }

    #[test]
    fn verify_examples() {
        let g = z2z2();
        let phi = scalar_phi(&g);
        assert!(verify(&phi, &Cochain::zero(4, 2, 1, 2)).unwrap().passed());
        let pauli = bicharacter(&g, 1, 2, &[vec![0, 1], vec![0, 0]]).unwrap();
        assert!(verify(&phi, &pauli).unwrap().passed());
        let mut bad = pauli.clone();
        bad.set(&[1, 2], &[1 + bad.get(&[1, 2])[0] as i64]);
        let rep = verify(&phi, &bad).unwrap();
        assert!(!rep.passed());
        assert!(rep.cocycle_violations.iter().all(|&(a, b, c)| [a, b, c].contains(&1) || [a, b, c].contains(&2) || [a,b,c].contains(&3)));
        assert!(rep.cocycle_violations.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(FactorSystem::new(&phi, bad), Err(Error::NotAFactorSystem(_))));
    }

    #[test]
    fn verify_matches_associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = FgAbelianGroup::new(vec![2, 2]);
        let alg = FdCStarAlgebra::new(vec![1, 2], 4).unwrap();
        let swap = PicardElement::new(vec![1, 0]).unwrap();
        let phi = PicHomomorphism::new(&g, &alg, vec![swap, PicardElement::identity(2)]).unwrap();
        let coeff = phi.coefficient_module(4);
        for trial in 0..4 {
            let w = if trial % 2 == 0 { random_cocycle(&g, &coeff, 2, &mut rng).unwrap() } else { random_cochain(&g, &coeff, 2, &mut rng) };
            let raw = RawFamily::new(&phi, w.clone()).unwrap();
            let ob = obstruction(&raw).unwrap();
            assert_eq!(ob.is_factor_system, verify(&phi, &w).unwrap().passed());
            assert!(ob.is_cocycle);
            // d_MΨ = dδ
            assert_eq!(ob.cochain, differential(&g, &coeff, &w).unwrap());
        }
    }

    #[test]
    fn twisting_and_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = z2z2();
        let phi = scalar_phi(&g);
        let fs = FactorSystem::canonical(&phi, 2).unwrap();
        assert_eq!(fs.twist(&Cochain::zero(4, 2, 1, 2)).unwrap(), fs);
        let w = fs.equivalent(&fs).unwrap().unwrap();
        assert!(w.is_zero() || fs.verify_transport(&fs, &w).unwrap());
        let pauli = fs.twist(&bicharacter(&g, 1, 2, &[vec![0, 1], vec![0, 0]]).unwrap()).unwrap();
        assert_eq!(fs.equivalent(&pauli).unwrap(), None);
        // twist by dh is equivalent, and the witness gives an explicit transport
        let coeff = fs.coefficient_module();
        let h = random_cochain(&g, &coeff, 1, &mut rng);
        let dh = differential(&g, &coeff, &h).unwrap();
        let tw = pauli.twist(&dh).unwrap();
        let w = pauli.equivalent(&tw).unwrap().expect("coboundary twist is equivalent");
        assert!(pauli.verify_transport(&tw, &w).unwrap());
        assert!(!pauli.verify_transport(&fs, &Cochain::zero(4, 1, 1, 2)).unwrap());
        // twisting is an action
        let a = bicharacter(&g, 1, 2, &[vec![1, 0], vec![0, 1]]).unwrap();
        let b = bicharacter(&g, 1, 2, &[vec![0, 1], vec![0, 0]]).unwrap();
        assert_eq!(fs.twist(&a).unwrap().twist(&b).unwrap(), fs.twist(&a.add(&b)).unwrap());
        let mut notco = Cochain::zero(4, 2, 1, 2);
        notco.set(&[1, 1], &[1]);
        assert_eq!(fs.twist(&notco), Err(Error::NotACocycle));
    }

    #[test]
    fn normalization_is_nice() {
        let g = FgAbelianGroup::new(vec![3]);
        let alg = FdCStarAlgebra::new(vec![1, 1, 1], 3).unwrap();
        let phi = PicHomomorphism::new(&g, &alg, vec![PicardElement::new(vec![1, 2, 0]).unwrap()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random_cocycle(&g, &phi.coefficient_module(3), 2, &mut rng).unwrap();
        let fs = FactorSystem::new(&phi, w).unwrap();
        for p in 0..3 {
            assert!(fs.omega().get(&[p, 0]).iter().chain(fs.omega().get(&[0, p])).all(|&v| v == 0));
        }
    }

    #[test]
    fn rechoosing_changes_by_coboundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = FgAbelianGroup::new(vec![4]);
        let alg = FdCStarAlgebra::new(vec![1, 1], 1).unwrap();
        let phi = PicHomomorphism::new(&g, &alg, vec![PicardElement::new(vec![1, 0]).unwrap()]).unwrap();
        let coeff = phi.coefficient_module(4);
        let raw = RawFamily::new(&phi, random_cochain(&g, &coeff, 2, &mut rng)).unwrap();
        let h = random_cochain(&g, &coeff, 2, &mut rng);
        let d1 = obstruction(&raw).unwrap().cochain;
        let d2 = obstruction(&raw.rechoose(&h).unwrap()).unwrap().cochain;
        assert_eq!(d2.sub(&d1), differential(&g, &coeff, &h).unwrap());
        let cc = characteristic_class_of(&raw).unwrap();
        assert!(cc.trivial);
        assert!(characteristic_class(&phi).unwrap().certificate.unwrap().is_zero());
    }

    #[test]
    fn nontrivial_three_class_is_detected() {
        let g = z2z2();
        let alg = FdCStarAlgebra::new(vec![1, 1], 1).unwrap();
        let swap = PicardElement::new(vec![1, 0]).unwrap();
        let phi = PicHomomorphism::new(&g, &alg, vec![swap, PicardElement::identity(2)]).unwrap();
        let h3 = cohomology(&g, &phi.coefficient_module(2), 3).unwrap();
        assert!(!h3.is_trivial_group());
        let coords: Vec<u64> = h3.invariant_factors.iter().enumerate().map(|(k, _)| (k == 0) as u64).collect();
        let c = h3.representative(&coords);
        let v = class_verdict(&phi, &c).unwrap();
        assert!(!v.trivial && v.certificate.is_none());
    }

    #[test]
    fn s_omega_examples() {
        // NC torus at θ = p/q
        let (q, p) = (3u32, 2i64);
        let g = FgAbelianGroup::new(vec![q as u64, q as u64]);
        let c = FdCStarAlgebra::new(vec![1], q).unwrap();
        let n = g.size();
        let s = vec![FdAutomorphism::identity(&c); n];
        let omega: Vec<AlgebraElement> = (0..n * n)
            .map(|t| {
                let (a, b) = (g.coords_of(t / n), g.coords_of(t % n));
                AlgebraElement { blocks: vec![Matrix::identity(1, q).scale(&S::root(q, p * a[0] * b[1]))] }
            })
            .collect();
        let pair = SOmegaPair { group: g.clone(), algebra: c.clone(), s, omega };
        let fs = from_s_omega(&pair).unwrap();
        let expected = bicharacter(&g, 1, q as u64, &[vec![0, p], vec![0, 0]]).unwrap();
        assert_eq!(fs.omega(), &expected);

        // block swap on M_2 ⊕ M_2
        let g = FgAbelianGroup::new(vec![2]);
        let b = FdCStarAlgebra::new(vec![2, 2], 1).unwrap();
        let sw = FdAutomorphism::permutation(&b, PicardElement::new(vec![1, 0]).unwrap()).unwrap();
        let pair = SOmegaPair {
            group: g.clone(),
            algebra: b.clone(),
            s: vec![FdAutomorphism::identity(&b), sw],
            omega: vec![b.unit(); 4],
        };
        let fs = from_s_omega(&pair).unwrap();
        assert_eq!(fs.phi().generator_images()[0].perm, vec![1, 0]);
        assert!(fs.omega().is_zero());
        // transported product agrees with b S(π)(b') ω(π,ρ)
        for x in b.basis() {
            for y in b.basis() {
                let lhs = fs.multiply(1, &pair.transport(1, &x), 1, &pair.transport(1, &y));
                let rhs = pair.transport(0, &x.mul(&pair.s[1].apply(&y)));
                assert_eq!(lhs, rhs);
            }
        }
        let mut broken = pair.clone();
        broken.omega[3] = b.unit().scale(&S::from_int(1, 2));
        assert!(matches!(from_s_omega(&broken), Err(Error::RelationViolated(_))));
    }

    #[test]
    fn phi_validation() {
        let g = FgAbelianGroup::new(vec![2]);
        let b = FdCStarAlgebra::new(vec![1, 1, 1], 1).unwrap();
        let cyc = PicardElement::new(vec![1, 2, 0]).unwrap();
        assert!(PicHomomorphism::new(&g, &b, vec![cyc.clone()]).is_err());
        let z = FgAbelianGroup::new(vec![0]);
        let phi = PicHomomorphism::new(&z, &b, vec![cyc.clone()]).unwrap();
        assert_eq!(phi.image(&[2]), cyc.then(&cyc));
        assert_eq!(phi.image(&[-1]), cyc.inverse());
        assert_eq!(FactorSystem::canonical(&phi, 2), Err(Error::InfiniteGroup));
    }
}
