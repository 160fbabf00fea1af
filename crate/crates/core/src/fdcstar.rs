//! Finite-dimensional C*-algebras `B = ⊕ M_{n_i}` and their Picard group.
//!
//! Every Morita self-equivalence of `B` is, up to isomorphism, a block-permutation
//! bimodule `M_σ` whose `i`-th component consists of `n_i × n_{σ(i)}` matrices.
//! Block `i` of `B` acts on component `i` from the left, block `σ(i)` from the right.
//! Permutations compose left to right: `(σ;τ)(i) = τ(σ(i))`, which is what lets
//! `M_σ ⊗ M_τ ≅ M_{σ;τ}` be the blockwise product `x_i y_{σ(i)}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SpanBuilder};
use crate::scalars::CyclotomicScalar as S;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FdCStarAlgebra {
    blocks: Vec<usize>,
    order: u32,
}

/// An element `(b_1, …, b_s)` of `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    pub blocks: Vec<Matrix>,
}

impl FdCStarAlgebra {
    pub fn new(blocks: Vec<usize>, order: u32) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::InvalidInput("block sizes must be positive and at least one block given".into()));
        }
        Ok(FdCStarAlgebra { blocks, order: order.max(1) })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn with_order(&self, order: u32) -> Self {
        FdCStarAlgebra { blocks: self.blocks.clone(), order }
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    pub fn center_dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().map(|&n| Matrix::zeros(n, n, self.order)).collect() }
    }

    pub fn unit(&self) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().map(|&n| Matrix::identity(n, self.order)).collect() }
    }

    /// Central projection onto block `i`.
    pub fn central_projection(&self, i: usize) -> AlgebraElement {
        let mut z = self.zero();
        z.blocks[i] = Matrix::identity(self.blocks[i], self.order);
        z
    }

    /// Matrix units `E^{(i)}_{ab}`, block by block, row-major.
    pub fn basis(&self) -> Vec<AlgebraElement> {
        let mut out = Vec::with_capacity(self.dim());
        for (i, &n) in self.blocks.iter().enumerate() {
            for a in 0..n {
                for b in 0..n {
                    let mut z = self.zero();
                    z.blocks[i] = Matrix::unit(n, n, a, b, self.order);
                    out.push(z);
                }
            }
        }
        out
    }

    pub fn coords(&self, x: &AlgebraElement) -> Vec<S> {
        x.blocks.iter().flat_map(|m| m.entries().iter().cloned()).collect()
    }

    pub fn from_coords(&self, v: &[S]) -> AlgebraElement {
        let mut it = v.iter();
        AlgebraElement {
            blocks: self
                .blocks
                .iter()
                .map(|&n| Matrix::from_fn(n, n, self.order, |_, _| it.next().expect("coordinate vector too short").clone()))
                .collect(),
        }
    }

    pub fn is_identity_perm(sigma: &[usize]) -> bool {
        sigma.iter().enumerate().all(|(i, &j)| i == j)
    }
}

impl AlgebraElement {
    pub fn mul(&self, o: &AlgebraElement) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn add(&self, o: &AlgebraElement) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &AlgebraElement) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: &S) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn adjoint(&self) -> AlgebraElement {
        AlgebraElement { blocks: self.blocks.iter().map(|a| a.adjoint()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|m| m.is_zero())
    }
}

/// A composable block permutation, the block-model incarnation of `Pic(B)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PicardElement {
    pub perm: Vec<usize>,
}

impl PicardElement {
    pub fn identity(s: usize) -> Self {
        PicardElement { perm: (0..s).collect() }
    }

    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let s = perm.len();
        let mut seen = vec![false; s];
        for &p in &perm {
            if p >= s || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(PicardElement { perm })
    }

    /// `(σ;τ)(i) = τ(σ(i))`.
    pub fn then(&self, tau: &PicardElement) -> PicardElement {
        PicardElement { perm: self.perm.iter().map(|&j| tau.perm[j]).collect() }
    }

    pub fn inverse(&self) -> PicardElement {
        let mut inv = vec![0; self.perm.len()];
        for (i, &j) in self.perm.iter().enumerate() {
            inv[j] = i;
        }
        PicardElement { perm: inv }
    }

    pub fn is_identity(&self) -> bool {
        FdCStarAlgebra::is_identity_perm(&self.perm)
    }

    pub fn pow(&self, k: u64) -> PicardElement {
        let mut acc = PicardElement::identity(self.perm.len());
        for _ in 0..k {
            acc = acc.then(self);
        }
        acc
    }

    pub fn order(&self) -> u64 {
        let mut k = 1;
        let mut p = self.clone();
        while !p.is_identity() {
            p = p.then(self);
            k += 1;
        }
        k
    }
}

/// A central unitary `(ζ_N^{e_1}, …, ζ_N^{e_s})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CentralUnitary {
    pub modulus: u64,
    pub exps: Vec<u64>,
}

impl CentralUnitary {
    pub fn one(s: usize) -> Self {
        CentralUnitary { modulus: 1, exps: vec![0; s] }
    }

    pub fn new(modulus: u64, exps: Vec<i64>) -> Self {
        CentralUnitary { modulus, exps: exps.iter().map(|e| e.rem_euclid(modulus as i64) as u64).collect() }
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Rewrite at the finer modulus `m` (a multiple of the current one).
    pub fn at(&self, m: u64) -> Result<CentralUnitary> {
        if !m.is_multiple_of(self.modulus) {
            return Err(Error::InvalidInput(format!("{m} is not a multiple of {}", self.modulus)));
        }
        let f = m / self.modulus;
        Ok(CentralUnitary { modulus: m, exps: self.exps.iter().map(|e| e * f).collect() })
    }

    /// Smallest-modulus form.
    pub fn reduced(&self) -> CentralUnitary {
        let mut m = self.modulus;
        let mut exps = self.exps.clone();
        for p in 2..=self.modulus {
            while m.is_multiple_of(p) && exps.iter().all(|e| e % p == 0) {
                m /= p;
                exps.iter_mut().for_each(|e| *e /= p);
            }
        }
        CentralUnitary { modulus: m.max(1), exps }
    }

    pub fn mul(&self, o: &CentralUnitary) -> CentralUnitary {
        let l = num_integer::lcm(self.modulus, o.modulus);
        let a = self.at(l).unwrap();
        let b = o.at(l).unwrap();
        CentralUnitary { modulus: l, exps: a.exps.iter().zip(&b.exps).map(|(x, y)| (x + y) % l).collect() }
    }

    pub fn inverse(&self) -> CentralUnitary {
        let m = self.modulus;
        CentralUnitary { modulus: m, exps: self.exps.iter().map(|e| (m - e) % m).collect() }
    }

    pub fn phase(&self, i: usize, order: u32) -> S {
        let f = order as u64 / self.modulus;
        assert_eq!(order as u64 % self.modulus, 0, "scalar order must contain the unitary's roots");
        S::root(order, (self.exps[i] * f) as i64)
    }

    pub fn to_element(&self, alg: &FdCStarAlgebra) -> Result<AlgebraElement> {
        if !(alg.order() as u64).is_multiple_of(self.modulus) {
            return Err(Error::InvalidInput(format!(
                "scalar order {} does not contain μ_{}",
                alg.order(),
                self.modulus
            )));
        }
        Ok(AlgebraElement {
            blocks: alg
                .blocks()
                .iter()
                .enumerate()
                .map(|(i, &n)| Matrix::identity(n, alg.order()).scale(&self.phase(i, alg.order())))
                .collect(),
        })
    }
}

/// `M_σ` over `B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EquivalenceBimodule {
    pub algebra: FdCStarAlgebra,
    pub sigma: PicardElement,
}

/// An element of `M_σ`: one `n_i × n_{σ(i)}` matrix per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BimoduleElement {
    pub comps: Vec<Matrix>,
}

impl BimoduleElement {
    pub fn add(&self, o: &BimoduleElement) -> BimoduleElement {
        BimoduleElement { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &BimoduleElement) -> BimoduleElement {
        BimoduleElement { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: &S) -> BimoduleElement {
        BimoduleElement { comps: self.comps.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|m| m.is_zero())
    }

    /// Left multiplication by a central unitary: component `i` gets phase `u_i`.
    pub fn phase(&self, u: &CentralUnitary, order: u32) -> BimoduleElement {
        BimoduleElement { comps: self.comps.iter().enumerate().map(|(i, m)| m.scale(&u.phase(i, order))).collect() }
    }
}

impl EquivalenceBimodule {
    pub fn new(algebra: &FdCStarAlgebra, sigma: PicardElement) -> Result<Self> {
        if sigma.perm.len() != algebra.block_count() {
            return Err(Error::MismatchedAlgebra);
        }
        Ok(EquivalenceBimodule { algebra: algebra.clone(), sigma })
    }

    pub fn trivial(algebra: &FdCStarAlgebra) -> Self {
        EquivalenceBimodule { algebra: algebra.clone(), sigma: PicardElement::identity(algebra.block_count()) }
    }

    fn shape(&self, i: usize) -> (usize, usize) {
        (self.algebra.blocks[i], self.algebra.blocks[self.sigma.perm[i]])
    }

    pub fn dim(&self) -> usize {
        (0..self.algebra.block_count()).map(|i| {
            let (r, c) = self.shape(i);
            r * c
        }).sum()
    }

    pub fn zero(&self) -> BimoduleElement {
        let o = self.algebra.order;
        BimoduleElement {
            comps: (0..self.algebra.block_count()).map(|i| {
                let (r, c) = self.shape(i);
                Matrix::zeros(r, c, o)
            }).collect(),
        }
    }

    /// Basis labels `(block, row, col)` in the order used by [`Self::basis`].
    pub fn basis_labels(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.algebra.block_count() {
            let (r, c) = self.shape(i);
            for a in 0..r {
                for b in 0..c {
                    out.push((i, a, b));
                }
            }
        }
        out
    }

    pub fn basis(&self) -> Vec<BimoduleElement> {
        let o = self.algebra.order;
        self.basis_labels()
            .into_iter()
            .map(|(i, a, b)| {
                let mut z = self.zero();
                let (r, c) = self.shape(i);
                z.comps[i] = Matrix::unit(r, c, a, b, o);
                z
            })
            .collect()
    }

    pub fn coords(&self, x: &BimoduleElement) -> Vec<S> {
        x.comps.iter().flat_map(|m| m.entries().iter().cloned()).collect()
    }

    pub fn from_coords(&self, v: &[S]) -> BimoduleElement {
        let o = self.algebra.order;
        let mut it = v.iter();
        BimoduleElement {
            comps: (0..self.algebra.block_count())
                .map(|i| {
                    let (r, c) = self.shape(i);
                    Matrix::from_fn(r, c, o, |_, _| it.next().expect("coordinate vector too short").clone())
                })
                .collect(),
        }
    }

    /// `(b·x)_i = b_i x_i`.
    pub fn left(&self, b: &AlgebraElement, x: &BimoduleElement) -> BimoduleElement {
        BimoduleElement { comps: x.comps.iter().enumerate().map(|(i, m)| b.blocks[i].mul(m)).collect() }
    }

    /// `(x·b)_i = x_i b_{σ(i)}`.
    pub fn right(&self, x: &BimoduleElement, b: &AlgebraElement) -> BimoduleElement {
        BimoduleElement {
            comps: x.comps.iter().enumerate().map(|(i, m)| m.mul(&b.blocks[self.sigma.perm[i]])).collect(),
        }
    }

    /// `⟨x,y⟩_B`, block `j` equal to `x_{σ⁻¹j}^* y_{σ⁻¹j}`.
    pub fn inner_right(&self, x: &BimoduleElement, y: &BimoduleElement) -> AlgebraElement {
        let inv = self.sigma.inverse();
        AlgebraElement { blocks: (0..self.algebra.block_count()).map(|j| {
            let i = inv.perm[j];
            x.comps[i].adjoint().mul(&y.comps[i])
        }).collect() }
    }

    /// `_B⟨x,y⟩`, block `i` equal to `x_i y_i^*`.
    pub fn inner_left(&self, x: &BimoduleElement, y: &BimoduleElement) -> AlgebraElement {
        AlgebraElement { blocks: x.comps.iter().zip(&y.comps).map(|(a, b)| a.mul(&b.adjoint())).collect() }
    }

    /// Rank of the span of `⟨x,y⟩_B` and of `_B⟨x,y⟩` over basis pairs.
    pub fn fullness_ranks(&self) -> (usize, usize) {
        let basis = self.basis();
        let mut right = SpanBuilder::new(self.algebra.dim());
        let mut left = SpanBuilder::new(self.algebra.dim());
        for x in &basis {
            for y in &basis {
                right.insert(crate::linalg::sparse(&self.algebra.coords(&self.inner_right(x, y))));
                left.insert(crate::linalg::sparse(&self.algebra.coords(&self.inner_left(x, y))));
            }
        }
        (right.rank(), left.rank())
    }

    pub fn is_full(&self) -> bool {
        let d = self.algebra.dim();
        self.fullness_ranks() == (d, d)
    }

    /// `M_σ ⊗_B M_τ ≅ M_{σ;τ}`.
    pub fn tensor(&self, other: &EquivalenceBimodule) -> Result<EquivalenceBimodule> {
        if self.algebra.blocks != other.algebra.blocks {
            return Err(Error::MismatchedAlgebra);
        }
        let order = num_integer::lcm(self.algebra.order, other.algebra.order);
        Ok(EquivalenceBimodule { algebra: self.algebra.with_order(order), sigma: self.sigma.then(&other.sigma) })
    }

    /// The canonical isomorphism `x ⊗ y ↦ (x_i y_{σ(i)})_i` into `M_{σ;τ}`.
    pub fn tensor_elements(&self, x: &BimoduleElement, y: &BimoduleElement) -> BimoduleElement {
        BimoduleElement { comps: x.comps.iter().enumerate().map(|(i, m)| m.mul(&y.comps[self.sigma.perm[i]])).collect() }
    }

    /// `Φ_M(u)_i = u_{σ(i)}`, the central unitary with `Φ_M(u)·m = m·u`.
    pub fn phi(&self, u: &CentralUnitary) -> CentralUnitary {
        CentralUnitary { modulus: u.modulus, exps: self.sigma.perm.iter().map(|&j| u.exps[j]).collect() }
    }

    /// The central unitary `u` with `T(m) = u·m`, verified on a basis.
    pub fn automorphism_phase(&self, t: &dyn Fn(&BimoduleElement) -> BimoduleElement) -> Result<CentralUnitary> {
        let order = self.algebra.order;
        let s = self.algebra.block_count();
        let mut exps = Vec::with_capacity(s);
        for i in 0..s {
            let mut e00 = self.zero();
            let (r, c) = self.shape(i);
            e00.comps[i] = Matrix::unit(r, c, 0, 0, order);
            let img = t(&e00);
            if img.comps.len() != s {
                return Err(Error::NotAnAutomorphism("image has the wrong shape".into()));
            }
            let ph = img.comps[i].get(0, 0).clone();
            let root = ph
                .to_root_of_unity()
                .ok_or_else(|| Error::NotAnAutomorphism(format!("block {i} is scaled by {ph}, not a root of unity")))?;
            let e = root
                .exponent_at(order as u64)
                .map_err(|_| Error::NotAnAutomorphism(format!("phase in block {i} lies outside μ_{order}")))?;
            exps.push(e as i64);
        }
        let u = CentralUnitary::new(order as u64, exps);
        for (k, b) in self.basis().iter().enumerate() {
            if t(b) != b.phase(&u, order) {
                return Err(Error::NotAnAutomorphism(format!("T(m) ≠ u·m on basis element {k}")));
            }
        }
        Ok(u.reduced())
    }
}

/// `α(b)_i = U_i b_{τ(i)} U_i^*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FdAutomorphism {
    pub algebra: FdCStarAlgebra,
    pub tau: PicardElement,
    pub unitaries: Vec<Matrix>,
}

impl FdAutomorphism {
    pub fn new(algebra: &FdCStarAlgebra, tau: PicardElement, unitaries: Vec<Matrix>) -> Result<Self> {
        let s = algebra.block_count();
        if tau.perm.len() != s || unitaries.len() != s {
            return Err(Error::MismatchedAlgebra);
        }
        for i in 0..s {
            let n = algebra.blocks[i];
            if algebra.blocks[tau.perm[i]] != n {
                return Err(Error::InvalidInput(format!("block {i} is sent to a block of different size")));
            }
            let u = &unitaries[i];
            if u.rows != n || u.cols != n || u.mul(&u.adjoint()) != Matrix::identity(n, u.order()) {
                return Err(Error::InvalidInput(format!("conjugator for block {i} is not unitary")));
            }
        }
        let order = unitaries.iter().fold(algebra.order, |l, u| num_integer::lcm(l, u.order()));
        Ok(FdAutomorphism { algebra: algebra.with_order(order), tau, unitaries })
    }

    pub fn identity(algebra: &FdCStarAlgebra) -> Self {
        let o = algebra.order;
        FdAutomorphism {
            algebra: algebra.clone(),
            tau: PicardElement::identity(algebra.block_count()),
            unitaries: algebra.blocks.iter().map(|&n| Matrix::identity(n, o)).collect(),
        }
    }

    /// Pure block permutation.
    pub fn permutation(algebra: &FdCStarAlgebra, tau: PicardElement) -> Result<Self> {
        let o = algebra.order;
        Self::new(algebra, tau, algebra.blocks.iter().map(|&n| Matrix::identity(n, o)).collect())
    }

    /// Inner automorphism `Ad(u)`.
    pub fn inner(algebra: &FdCStarAlgebra, u: &AlgebraElement) -> Result<Self> {
        Self::new(algebra, PicardElement::identity(algebra.block_count()), u.blocks.clone())
    }

    pub fn apply(&self, b: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            blocks: (0..self.algebra.block_count())
                .map(|i| self.unitaries[i].mul(&b.blocks[self.tau.perm[i]]).mul(&self.unitaries[i].adjoint()))
                .collect(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FdAutomorphism) -> FdAutomorphism {
        let s = self.algebra.block_count();
        let unitaries = (0..s).map(|i| self.unitaries[i].mul(&other.unitaries[self.tau.perm[i]])).collect();
        let order = num_integer::lcm(self.algebra.order, other.algebra.order);
        FdAutomorphism { algebra: self.algebra.with_order(order), tau: self.tau.then(&other.tau), unitaries }
    }

    pub fn inverse(&self) -> FdAutomorphism {
        let inv = self.tau.inverse();
        // α^{-1}(c)_{τ(i)} = U_i^* c_i U_i
        let unitaries = (0..self.algebra.block_count()).map(|j| self.unitaries[inv.perm[j]].adjoint()).collect();
        FdAutomorphism { algebra: self.algebra.clone(), tau: inv, unitaries }
    }

    pub fn is_inner(&self) -> bool {
        self.tau.is_identity()
    }

    /// The bimodule `M_α` with its identification with the block model.
    pub fn to_picard(&self) -> AutomorphismBimodule {
        AutomorphismBimodule {
            alpha: self.clone(),
            model: EquivalenceBimodule { algebra: self.algebra.clone(), sigma: self.tau.clone() },
        }
    }
}

/// `M_α`: the space `B` with right action `m·b = m α(b)` and `⟨m_1, m_2⟩ = α^{-1}(m_1^* m_2)`.
#[derive(Clone, Debug)]
pub struct AutomorphismBimodule {
    pub alpha: FdAutomorphism,
    pub model: EquivalenceBimodule,
}

impl AutomorphismBimodule {
    pub fn picard(&self) -> &PicardElement {
        &self.model.sigma
    }

    /// `Θ(m)_i = m_i U_i`, an isomorphism `M_α → M_τ`.
    pub fn theta(&self, m: &AlgebraElement) -> BimoduleElement {
        BimoduleElement { comps: m.blocks.iter().zip(&self.alpha.unitaries).map(|(x, u)| x.mul(u)).collect() }
    }

    pub fn theta_inverse(&self, x: &BimoduleElement) -> AlgebraElement {
        AlgebraElement { blocks: x.comps.iter().zip(&self.alpha.unitaries).map(|(m, u)| m.mul(&u.adjoint())).collect() }
    }

    /// Check that `Θ` intertwines both actions and the right inner product on basis elements.
    pub fn verify(&self) -> Result<()> {
        let alg = &self.alpha.algebra;
        let basis = alg.basis();
        for m in &basis {
            let tm = self.theta(m);
            if self.theta_inverse(&tm) != *m {
                return Err(Error::NotAnAutomorphism("Θ is not invertible".into()));
            }
            for b in &basis {
                if self.theta(&b.mul(m)) != self.model.left(b, &tm) {
                    return Err(Error::NotAnAutomorphism("Θ does not intertwine the left action".into()));
                }
                if self.theta(&m.mul(&self.alpha.apply(b))) != self.model.right(&tm, b) {
                    return Err(Error::NotAnAutomorphism("Θ does not intertwine the right action".into()));
                }
                let lhs = self.alpha.inverse().apply(&m.adjoint().mul(b));
                if lhs != self.model.inner_right(&tm, &self.theta(b)) {
                    return Err(Error::NotAnAutomorphism("Θ does not preserve the inner product".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn alg(b: &[usize], o: u32) -> FdCStarAlgebra {
        FdCStarAlgebra::new(b.to_vec(), o).unwrap()
    }

    fn rand_elem(m: &EquivalenceBimodule, rng: &mut ChaCha8Rng) -> BimoduleElement {
        let o = m.algebra.order();
        let v: Vec<S> = (0..m.dim()).map(|_| S::root(o, rng.gen_range(0..o as i64)).scale_int(rng.gen_range(-2..3))).collect();
        m.from_coords(&v)
    }

    trait ScaleInt {
        fn scale_int(self, k: i64) -> S;
    }
    impl ScaleInt for S {
        fn scale_int(self, k: i64) -> S {
            let o = self.order();
            self * S::from_int(o, k)
        }
    }

    fn all_perms(s: usize) -> Vec<Vec<usize>> {
        if s == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_perms(s - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, s - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn tensor_examples() {
        let b = alg(&[2, 3], 1);
        let swap = EquivalenceBimodule::new(&b, PicardElement::new(vec![1, 0]).unwrap()).unwrap();
        let id = EquivalenceBimodule::trivial(&b);
        assert_eq!(swap.tensor(&id).unwrap().sigma, swap.sigma);
        let sq = swap.tensor(&swap).unwrap();
        assert!(sq.sigma.is_identity());
        // products of 2x3 and 3x2 matrices span both blocks
        let mut span = SpanBuilder::new(b.dim());
        for x in swap.basis() {
            for y in swap.basis() {
                let xy = swap.tensor_elements(&x, &y);
                span.insert(crate::linalg::sparse(&sq.coords(&xy)));
            }
        }
        assert_eq!(span.rank(), b.dim());
        let b3 = alg(&[2, 2, 2], 1);
        let cyc = EquivalenceBimodule::new(&b3, PicardElement::new(vec![1, 2, 0]).unwrap()).unwrap();
        assert!(cyc.tensor(&cyc).unwrap().tensor(&cyc).unwrap().sigma.is_identity());
        let other = alg(&[1, 1], 1);
        assert_eq!(swap.tensor(&EquivalenceBimodule::trivial(&other)), Err(Error::MismatchedAlgebra));
    }

    #[test]
    fn tensor_preserves_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = alg(&[1, 2, 2], 4);
        let m = EquivalenceBimodule::new(&b, PicardElement::new(vec![0, 2, 1]).unwrap()).unwrap();
        let n = EquivalenceBimodule::new(&b, PicardElement::new(vec![0, 1, 2]).unwrap()).unwrap();
        let mn = m.tensor(&n).unwrap();
        for _ in 0..5 {
            let (x, xp) = (rand_elem(&m, &mut rng), rand_elem(&m, &mut rng));
            let (y, yp) = (rand_elem(&n, &mut rng), rand_elem(&n, &mut rng));
            let lhs = mn.inner_right(&m.tensor_elements(&x, &y), &m.tensor_elements(&xp, &yp));
            let rhs = n.inner_right(&y, &n.left(&m.inner_right(&x, &xp), &yp));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn bimodule_axioms_and_fullness() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = alg(&[2, 1, 2], 3);
        for p in all_perms(3) {
            let Ok(m) = EquivalenceBimodule::new(&b, PicardElement::new(p.clone()).unwrap()) else { continue };
            if (0..3).any(|i| b.blocks()[i] != b.blocks()[p[i]]) {
                continue;
            }
            assert!(m.is_full(), "{p:?}");
            for _ in 0..3 {
                let (x, y, z) = (rand_elem(&m, &mut rng), rand_elem(&m, &mut rng), rand_elem(&m, &mut rng));
                let basis = b.basis();
                let a = &basis[rng.gen_range(0..basis.len())];
                assert_eq!(m.inner_right(&m.left(a, &x), &y), m.inner_right(&x, &m.left(&a.adjoint(), &y)));
                assert_eq!(m.left(&m.inner_left(&x, &y), &z), m.right(&x, &m.inner_right(&y, &z)));
            }
        }
    }

    #[test]
    fn picard_group_is_symmetric_group() {
        let b = alg(&[1, 1, 1, 1], 1);
        let perms = all_perms(4);
        assert_eq!(perms.len(), 24);
        let u = CentralUnitary::new(7, vec![1, 2, 3, 4]);
        for p in &perms {
            for q in &perms {
                let mp = EquivalenceBimodule::new(&b, PicardElement::new(p.clone()).unwrap()).unwrap();
                let mq = EquivalenceBimodule::new(&b, PicardElement::new(q.clone()).unwrap()).unwrap();
                let pq = mp.tensor(&mq).unwrap();
                assert_eq!(pq.phi(&u), mp.phi(&mq.phi(&u)));
            }
        }
        let distinct: std::collections::HashSet<_> = perms.iter().collect();
        assert_eq!(distinct.len(), 24);
    }

    #[test]
    fn phase_extraction() {
        let b = alg(&[2], 4);
        let m = EquivalenceBimodule::trivial(&b);
        let id = m.automorphism_phase(&|x| x.clone()).unwrap();
        assert!(id.is_one());
        let i = S::root(4, 1);
        let u = m.automorphism_phase(&|x| x.scale(&i)).unwrap();
        assert_eq!(u, CentralUnitary::new(4, vec![1]));
        let c2 = alg(&[1, 1], 3);
        let sw = EquivalenceBimodule::new(&c2, PicardElement::new(vec![1, 0]).unwrap()).unwrap();
        let t = |x: &BimoduleElement| BimoduleElement {
            comps: vec![x.comps[0].scale(&S::root(3, 1)), x.comps[1].scale(&S::root(3, 2))],
        };
        assert_eq!(sw.automorphism_phase(&t).unwrap(), CentralUnitary::new(3, vec![1, 2]));
        // transposing within a block is not a phase
        let bad = |x: &BimoduleElement| BimoduleElement { comps: vec![x.comps[0].transpose()] };
        assert!(matches!(m.automorphism_phase(&bad), Err(Error::NotAnAutomorphism(_))));
        // swap bimodule: Φ moves phases between blocks
        let c = CentralUnitary::new(5, vec![1, 0]);
        assert_eq!(sw.phi(&c), CentralUnitary::new(5, vec![0, 1]));
    }

    #[test]
    fn automorphisms_to_picard() {
        let b = alg(&[2, 2], 4);
        let i = S::root(4, 1);
        let u = Matrix::from_fn(2, 2, 4, |r, c| match (r, c) {
            (0, 1) | (1, 0) => i.clone(),
            _ => S::zero(4),
        });
        let inner = FdAutomorphism::new(&b, PicardElement::identity(2), vec![u.clone(), Matrix::identity(2, 4)]).unwrap();
        let mi = inner.to_picard();
        assert!(mi.picard().is_identity());
        mi.verify().unwrap();
        let swap = FdAutomorphism::permutation(&b, PicardElement::new(vec![1, 0]).unwrap()).unwrap();
        let ms = swap.to_picard();
        assert_eq!(ms.picard().perm, vec![1, 0]);
        ms.verify().unwrap();
        let comp = inner.compose(&swap);
        comp.to_picard().verify().unwrap();
        assert_eq!(*comp.to_picard().picard(), inner.tau.then(&swap.tau));
        for x in b.basis() {
            assert_eq!(comp.apply(&x), inner.apply(&swap.apply(&x)));
            assert_eq!(comp.inverse().apply(&comp.apply(&x)), x);
        }
    }
}
