//! The graded algebra `A = ⊕_π A(π)` of a finite dynamical system, its involution,
//! the character action, and the freeness battery.
//!
//! Every system here carries a homogeneous basis: basis vector `k` lies in the isotypic
//! component of character `degree[k]`, so `α_g(e_k) = ⟨degree[k], g⟩ e_k`. Systems built
//! from a factor system use the matrix units of each `M_π` as that basis. Systems given by
//! an arbitrary action are rebased onto a homogeneous basis first (see [`from_action`]).

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorsys::{obstruction, FactorSystem, PicHomomorphism, RawFamily};
use crate::fdcstar::{AlgebraElement, FdCStarAlgebra, PicardElement};
use crate::groups::FgAbelianGroup;
use crate::linalg::{dense, sparse, Matrix, SparseVec, SpanBuilder};
use crate::scalars::CyclotomicScalar as S;

fn axpy(out: &mut SparseVec, j: usize, v: S) {
    if v.is_zero() {
        return;
    }
    match out.get_mut(&j) {
        Some(e) => {
            *e += &v;
            if e.is_zero() {
                out.remove(&j);
            }
        }
        None => {
            out.insert(j, v);
        }
    }
}

pub fn add_vec(a: &SparseVec, b: &SparseVec) -> SparseVec {
    let mut out = a.clone();
    for (&j, v) in b {
        axpy(&mut out, j, v.clone());
    }
    out
}

pub fn sub_vec(a: &SparseVec, b: &SparseVec) -> SparseVec {
    let mut out = a.clone();
    for (&j, v) in b {
        axpy(&mut out, j, -v);
    }
    out
}

pub fn scale_vec(a: &SparseVec, c: &S) -> SparseVec {
    a.iter().map(|(&j, v)| (j, v * c)).filter(|(_, v)| !v.is_zero()).collect()
}

pub fn unit_vec(k: usize, order: u32) -> SparseVec {
    SparseVec::from([(k, S::one(order))])
}

/// Matrix unit position inside a block of `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockLabel {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

/// Identification of the degree-0 basis vectors with matrix units of `⊕ M_{n_i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseModel {
    pub blocks: Vec<usize>,
    /// `(basis index in A, matrix unit)` for every degree-0 basis vector.
    pub units: Vec<(usize, BlockLabel)>,
}

impl BaseModel {
    pub fn algebra(&self, order: u32) -> FdCStarAlgebra {
        FdCStarAlgebra::new(self.blocks.clone(), order).expect("base blocks are positive")
    }

    pub fn to_element(&self, v: &SparseVec, order: u32) -> AlgebraElement {
        let mut b = self.algebra(order).zero();
        for (idx, l) in &self.units {
            if let Some(c) = v.get(idx) {
                b.blocks[l.block].set(l.row, l.col, c.embed(num_integer::lcm(c.order(), order)).unwrap());
            }
        }
        b
    }

    pub fn from_element(&self, b: &AlgebraElement) -> SparseVec {
        let mut out = SparseVec::new();
        for (idx, l) in &self.units {
            axpy(&mut out, *idx, b.blocks[l.block].get(l.row, l.col).clone());
        }
        out
    }

    pub fn central_projection(&self, i: usize, order: u32) -> SparseVec {
        self.units.iter().filter(|(_, l)| l.block == i && l.row == l.col).map(|(idx, _)| (*idx, S::one(order))).collect()
    }
}

/// A finite-dimensional unital *-algebra given by structure constants on a basis.
#[derive(Clone, Debug)]
pub struct RawAlgebra {
    pub order: u32,
    pub dim: usize,
    /// `e_k e_l` at position `k·dim + l`.
    pub table: Vec<SparseVec>,
    pub unit: SparseVec,
    /// `e_k^*`; the involution is the antilinear extension.
    pub star: Vec<SparseVec>,
}

impl RawAlgebra {
    /// Functions on `n` points in the basis of point masses.
    pub fn functions(n: usize, order: u32) -> Self {
        let mut table = vec![SparseVec::new(); n * n];
        for p in 0..n {
            table[p * n + p] = unit_vec(p, order);
        }
        RawAlgebra {
            order,
            dim: n,
            table,
            unit: (0..n).map(|p| (p, S::one(order))).collect(),
            star: (0..n).map(|p| unit_vec(p, order)).collect(),
        }
    }

    pub fn mul(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (&k, a) in x {
            for (&l, b) in y {
                let ab = a * b;
                for (&j, c) in &self.table[k * self.dim + l] {
                    axpy(&mut out, j, &ab * c);
                }
            }
        }
        out
    }

    pub fn star_of(&self, x: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (&k, a) in x {
            let c = a.conj();
            for (&j, v) in &self.star[k] {
                axpy(&mut out, j, &c * v);
            }
        }
        out
    }

    /// Tensor product, basis `e_k ⊗ f_l` at `k·dim(other) + l`.
    pub fn tensor(&self, other: &RawAlgebra) -> RawAlgebra {
        let (d1, d2) = (self.dim, other.dim);
        let dim = d1 * d2;
        let kron = |a: &SparseVec, b: &SparseVec| -> SparseVec {
            let mut out = SparseVec::new();
            for (&i, x) in a {
                for (&j, y) in b {
                    axpy(&mut out, i * d2 + j, x * y);
                }
            }
            out
        };
        let mut table = vec![SparseVec::new(); dim * dim];
        for k in 0..dim {
            for l in 0..dim {
                let (k1, k2, l1, l2) = (k / d2, k % d2, l / d2, l % d2);
                table[k * dim + l] = kron(&self.table[k1 * d1 + l1], &other.table[k2 * d2 + l2]);
            }
        }
        RawAlgebra {
            order: num_integer::lcm(self.order, other.order),
            dim,
            table,
            unit: kron(&self.unit, &other.unit),
            star: (0..dim).map(|k| kron(&self.star[k / d2], &other.star[k % d2])).collect(),
        }
    }
}

/// The permutation automorphism `δ_p ↦ δ_{perm(p)}` as a matrix (columns are images).
pub fn permutation_matrix(perm: &[usize], order: u32) -> Matrix {
    let n = perm.len();
    let mut m = Matrix::zeros(n, n, order);
    for (p, &q) in perm.iter().enumerate() {
        m.set(q, p, S::one(order));
    }
    m
}

fn apply_matrix(m: &Matrix, x: &SparseVec) -> SparseVec {
    let mut out = SparseVec::new();
    for (&k, a) in x {
        for j in 0..m.rows {
            let c = m.get(j, k);
            if !c.is_zero() {
                axpy(&mut out, j, a * c);
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct DynamicalSystem {
    order: u32,
    group: FgAbelianGroup,
    degree: Vec<usize>,
    raw: RawAlgebra,
    base: Option<BaseModel>,
    labels: Option<Vec<BlockLabel>>,
    fs: Option<FactorSystem>,
    /// `⟨π, g⟩` as an exponent of `ζ_order`, at `π·|G| + g`.
    pairing: Vec<u64>,
}

/// Constituents of a [`DynamicalSystem`]; see [`DynamicalSystem::from_parts`].
#[derive(Clone, Debug)]
pub struct SystemParts {
    pub group: FgAbelianGroup,
    pub degree: Vec<usize>,
    pub algebra: RawAlgebra,
    pub base: Option<BaseModel>,
    pub labels: Option<Vec<BlockLabel>>,
    pub fs: Option<FactorSystem>,
}

impl DynamicalSystem {
    /// Assemble and validate unit, grading, associativity and the involution laws.
    pub fn from_parts(p: SystemParts) -> Result<Self> {
        if !p.group.is_finite() {
            return Err(Error::InfiniteGroup);
        }
        let dim = p.algebra.dim;
        if p.degree.len() != dim || p.algebra.table.len() != dim * dim || p.algebra.star.len() != dim {
            return Err(Error::InvalidInput("system tables have inconsistent sizes".into()));
        }
        if p.degree.iter().any(|&d| d >= p.group.size()) {
            return Err(Error::InvalidInput("degree outside the character group".into()));
        }
        let order = num_integer::lcm(p.algebra.order, p.group.exponent() as u32);
        let g = p.group.size();
        let e = p.group.exponent();
        let f = order as u64 / e;
        let coords: Vec<Vec<i64>> = (0..g).map(|i| p.group.coords_of(i)).collect();
        let mut pairing = Vec::with_capacity(g * g);
        for a in &coords {
            for b in &coords {
                pairing.push(p.group.pair_exponent(a, b) * f);
            }
        }
        let sys = DynamicalSystem {
            order,
            group: p.group,
            degree: p.degree,
            raw: RawAlgebra { order, ..p.algebra },
            base: p.base,
            labels: p.labels,
            fs: p.fs,
            pairing,
        };
        sys.check_structure()?;
        Ok(sys)
    }

    fn check_structure(&self) -> Result<()> {
        let dim = self.dim();
        let add = self.group.add_table();
        let neg = self.group.neg_table();
        for k in 0..dim {
            let e = unit_vec(k, self.order);
            if self.mul(&self.raw.unit, &e) != e || self.mul(&e, &self.raw.unit) != e {
                return Err(Error::InvalidInput(format!("unit fails on basis vector {k}")));
            }
            if self.raw.star[k].keys().any(|&j| self.degree[j] != neg[self.degree[k]]) {
                return Err(Error::InvalidInput(format!("involution does not reverse the degree of {k}")));
            }
            for l in 0..dim {
                let d = add[self.degree[k]][self.degree[l]];
                if self.raw.table[k * dim + l].keys().any(|&j| self.degree[j] != d) {
                    return Err(Error::InvalidInput(format!("product e{k}·e{l} leaves its graded component")));
                }
            }
        }
        for k in 0..dim {
            for l in 0..dim {
                let kl = &self.raw.table[k * dim + l];
                for m in 0..dim {
                    let left = self.mul(kl, &unit_vec(m, self.order));
                    let right = self.mul(&unit_vec(k, self.order), &self.raw.table[l * dim + m]);
                    if left != right {
                        return Err(Error::InvalidInput(format!("associativity fails at (e{k}, e{l}, e{m})")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.raw.dim
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degree
    }

    pub fn raw(&self) -> &RawAlgebra {
        &self.raw
    }

    pub fn base_model(&self) -> Option<&BaseModel> {
        self.base.as_ref()
    }

    pub fn labels(&self) -> Option<&[BlockLabel]> {
        self.labels.as_deref()
    }

    pub fn factor_system(&self) -> Option<&FactorSystem> {
        self.fs.as_ref()
    }

    pub fn basis_of_degree(&self, pi: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.degree[k] == pi).collect()
    }

    pub fn fixed_dim(&self) -> usize {
        self.basis_of_degree(0).len()
    }

    pub fn unit(&self) -> &SparseVec {
        &self.raw.unit
    }

    pub fn basis_vec(&self, k: usize) -> SparseVec {
        unit_vec(k, self.order)
    }

    pub fn product_of_basis(&self, k: usize, l: usize) -> &SparseVec {
        &self.raw.table[k * self.dim() + l]
    }

    pub fn mul(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        self.raw.mul(x, y)
    }

    pub fn star(&self, x: &SparseVec) -> SparseVec {
        self.raw.star_of(x)
    }

    pub fn pair(&self, pi: usize, g: usize) -> S {
        S::root(self.order, self.pairing[pi * self.group.size() + g] as i64)
    }

    /// `α_g(x)`.
    pub fn act(&self, g: usize, x: &SparseVec) -> SparseVec {
        x.iter().map(|(&k, a)| (k, a * &self.pair(self.degree[k], g))).collect()
    }

    /// `P_π` read off the grading.
    pub fn project(&self, pi: usize, x: &SparseVec) -> SparseVec {
        x.iter().filter(|(&k, _)| self.degree[k] == pi).map(|(&k, a)| (k, a.clone())).collect()
    }

    /// `|G|^{-1} Σ_g conj⟨π,g⟩ α_g(x)`, computed from the action alone.
    pub fn average(&self, pi: usize, x: &SparseVec) -> SparseVec {
        let g = self.group.size();
        let mut acc = SparseVec::new();
        for h in 0..g {
            acc = add_vec(&acc, &scale_vec(&self.act(h, x), &self.pair(pi, h).conj()));
        }
        scale_vec(&acc, &S::from_rational(self.order, BigRational::new(BigInt::from(1), BigInt::from(g as i64))))
    }

    /// The right `B`-valued inner product. For systems built from a factor system this is
    /// the bimodule inner product of each `M_π` (components mutually orthogonal); otherwise
    /// `P_0(x^* y)`.
    pub fn inner(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        match (&self.fs, &self.labels, &self.base) {
            (Some(fs), Some(labels), Some(_)) => {
                let idx = self.label_index();
                let mut out = SparseVec::new();
                for (&k, a) in x {
                    let lk = labels[k];
                    let ca = a.conj();
                    for (&l, b) in y {
                        let ll = labels[l];
                        if self.degree[k] != self.degree[l] || lk.block != ll.block || lk.row != ll.row {
                            continue;
                        }
                        // (E_{ab})^* E_{ad} = E_{bd} in block σ_π(i)
                        let j = fs.phi().image_at(self.degree[k]).perm[lk.block];
                        let target = idx[&(0, BlockLabel { block: j, row: lk.col, col: ll.col })];
                        axpy(&mut out, target, &ca * b);
                    }
                }
                out
            }
            _ => self.inner_via_star(x, y),
        }
    }

    /// `P_0(x^* y)`.
    pub fn inner_via_star(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        self.project(0, &self.mul(&self.star(x), y))
    }

    fn label_index(&self) -> HashMap<(usize, BlockLabel), usize> {
        match &self.labels {
            Some(l) => l.iter().enumerate().map(|(k, lab)| ((self.degree[k], *lab), k)).collect(),
            None => HashMap::new(),
        }
    }

    pub fn is_commutative(&self) -> bool {
        let d = self.dim();
        (0..d).all(|k| (0..d).all(|l| self.raw.table[k * d + l] == self.raw.table[l * d + k]))
    }

    /// Dimension of the center, by an exact kernel computation.
    pub fn center_dim(&self) -> usize {
        let d = self.dim();
        let mut span = SpanBuilder::new(d * d);
        for l in 0..d {
            // column for z = e_l: (e_l e_k − e_k e_l) over all k
            let mut col = SparseVec::new();
            for k in 0..d {
                let c = sub_vec(&self.raw.table[l * d + k], &self.raw.table[k * d + l]);
                for (j, v) in c {
                    col.insert(k * d + j, v);
                }
            }
            span.insert(col);
        }
        d - span.rank()
    }

    /// Rank of the two-sided ideal generated by `x`.
    pub fn ideal_rank(&self, x: &SparseVec) -> usize {
        let d = self.dim();
        let mut span = SpanBuilder::new(d);
        for a in 0..d {
            let ax = self.mul(&self.basis_vec(a), x);
            for b in 0..d {
                if span.insert(self.mul(&ax, &self.basis_vec(b))) && span.is_full() {
                    return d;
                }
            }
        }
        span.rank()
    }

    /// Center equal to the scalars, and every basis vector generating all of `A`.
    pub fn simplicity(&self) -> Simplicity {
        let center_dim = self.center_dim();
        let basis_ideals_full = (0..self.dim()).all(|k| self.ideal_rank(&self.basis_vec(k)) == self.dim());
        Simplicity { center_dim, basis_ideals_full, simple: center_dim == 1 && basis_ideals_full }
    }

    /// Canonical text form of the structure constants, stable across runs.
    pub fn structure_table(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        out.push_str(&format!("group {:?}\ndegrees {:?}\n", self.group.factors(), self.degree));
        for k in 0..d {
            for l in 0..d {
                let v = &self.raw.table[k * d + l];
                if v.is_empty() {
                    continue;
                }
                let terms: Vec<String> = v.iter().map(|(j, c)| format!("{}*e{j}", c.embed(self.order).unwrap().to_q_string())).collect();
                out.push_str(&format!("e{k}.e{l} = {}\n", terms.join(" + ")));
            }
        }
        out
    }

    /// Matrix of `α_g` on the basis.
    pub fn action_matrix(&self, g: usize) -> Matrix {
        let d = self.dim();
        let mut m = Matrix::zeros(d, d, self.order);
        for k in 0..d {
            m.set(k, k, self.pair(self.degree[k], g));
        }
        m
    }

    /// The same algebra regraded: `degree'[k] = map[degree[k]]` in `group`.
    pub fn regrade(&self, group: &FgAbelianGroup, map: &[usize], keep_block_model: bool) -> Result<DynamicalSystem> {
        let degree = self.degree.iter().map(|&d| map[d]).collect();
        Self::from_parts(SystemParts {
            group: group.clone(),
            degree,
            algebra: self.raw.clone(),
            base: if keep_block_model { self.base.clone() } else { None },
            labels: None,
            fs: None,
        })
    }

    /// The subalgebra spanned by the basis vectors in `keep`, regraded by `map`.
    pub fn subsystem(&self, keep: &[usize], group: &FgAbelianGroup, map: &[usize]) -> Result<DynamicalSystem> {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let n = keep.len();
        let rename = |v: &SparseVec| -> Result<SparseVec> {
            v.iter()
                .map(|(j, c)| pos.get(j).map(|&p| (p, c.clone())).ok_or_else(|| Error::InvalidInput("subspace is not a *-subalgebra".into())))
                .collect()
        };
        let mut table = Vec::with_capacity(n * n);
        for &k in keep {
            for &l in keep {
                table.push(rename(self.product_of_basis(k, l))?);
            }
        }
        let star = keep.iter().map(|&k| rename(&self.raw.star[k])).collect::<Result<Vec<_>>>()?;
        let unit = rename(&self.raw.unit)?;
        let base = self.base.as_ref().and_then(|b| {
            let units: Option<Vec<_>> = b.units.iter().map(|(i, l)| pos.get(i).map(|&p| (p, *l))).collect();
            units.map(|units| BaseModel { blocks: b.blocks.clone(), units })
        });
        Self::from_parts(SystemParts {
            group: group.clone(),
            degree: keep.iter().map(|&k| map[self.degree[k]]).collect(),
            algebra: RawAlgebra { order: self.order, dim: n, table, unit, star },
            base,
            labels: None,
            fs: None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Simplicity {
    pub center_dim: usize,
    pub basis_ideals_full: bool,
    pub simple: bool,
}

/// Build `(A, G, α)` from a factor system.
pub fn build(fs: &FactorSystem) -> Result<DynamicalSystem> {
    let group = fs.group().clone();
    let g = group.size();
    let order = num_integer::lcm(num_integer::lcm(fs.algebra().order(), group.exponent() as u32), fs.modulus() as u32);
    let add = group.add_table();
    let mut degree = Vec::new();
    let mut labels = Vec::new();
    let sigmas: Vec<PicardElement> = (0..g).map(|p| fs.phi().image_at(p)).collect();
    for pi in 0..g {
        for (block, row, col) in fs.bimodule(pi).basis_labels() {
            degree.push(pi);
            labels.push(BlockLabel { block, row, col });
        }
    }
    let dim = degree.len();
    let idx: HashMap<(usize, BlockLabel), usize> = (0..dim).map(|k| ((degree[k], labels[k]), k)).collect();
    let omega = fs.omega();
    let f = order as u64 / omega.modulus;
    let mut table = vec![SparseVec::new(); dim * dim];
    for k in 0..dim {
        let (p, lk) = (degree[k], labels[k]);
        for l in 0..dim {
            let (r, ll) = (degree[l], labels[l]);
            if ll.block != sigmas[p].perm[lk.block] || lk.col != ll.row {
                continue;
            }
            let target = idx[&(add[p][r], BlockLabel { block: lk.block, row: lk.row, col: ll.col })];
            let phase = omega.get(&[p, r])[lk.block] * f;
            table[k * dim + l] = SparseVec::from([(target, S::root(order, phase as i64))]);
        }
    }
    let blocks = fs.algebra().blocks().to_vec();
    let unit: SparseVec = blocks
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| (0..n).map(move |a| (i, a)))
        .map(|(i, a)| (idx[&(0, BlockLabel { block: i, row: a, col: a })], S::one(order)))
        .collect();
    let base = BaseModel { blocks, units: (0..dim).filter(|&k| degree[k] == 0).map(|k| (k, labels[k])).collect() };
    // placeholder involution; replaced by the derived one below
    let mut raw = RawAlgebra { order, dim, table, unit, star: vec![SparseVec::new(); dim] };
    let star = derive_involution_from(&raw, &degree, &labels, &base, fs, &group)?;
    raw.star = star;
    let sys = DynamicalSystem::from_parts(SystemParts {
        group,
        degree,
        algebra: raw,
        base: Some(base),
        labels: Some(labels),
        fs: Some(fs.clone()),
    })
    .map_err(|e| Error::NotAFactorSystem(e.to_string()))?;
    // A(π) = M_π: the averaged projector fixes M_π and kills the rest
    for k in 0..dim {
        let e = sys.basis_vec(k);
        for pi in 0..g {
            let expected = if sys.degree[k] == pi { e.clone() } else { SparseVec::new() };
            if sys.average(pi, &e) != expected {
                return Err(Error::NotAFactorSystem(format!("isotypic projector P_{pi} misbehaves on e{k}")));
            }
        }
    }
    Ok(sys)
}

/// Raw families are refused unless their obstruction vanishes.
pub fn build_raw(raw: &RawFamily) -> Result<DynamicalSystem> {
    let ob = obstruction(raw)?;
    if !ob.is_factor_system {
        return Err(Error::NotAFactorSystem("d_MΨ is nonzero, multiplication is not associative".into()));
    }
    build(&FactorSystem::new(&raw.phi, raw.deviation.clone())?)
}

/// For each basis vector `x` of `M_π`, the unique `i(x) ∈ M_{−π}` with
/// `⟨i(x), z⟩_B = m(x, z)` for all basis `z` of `M_{−π}`.
fn derive_involution_from(
    raw: &RawAlgebra,
    degree: &[usize],
    labels: &[BlockLabel],
    base: &BaseModel,
    fs: &FactorSystem,
    group: &FgAbelianGroup,
) -> Result<Vec<SparseVec>> {
    let dim = raw.dim;
    let order = raw.order;
    let neg = group.neg_table();
    let base_pos: HashMap<usize, usize> = base.units.iter().enumerate().map(|(p, (k, _))| (*k, p)).collect();
    let d0 = base.units.len();
    let idx: HashMap<(usize, BlockLabel), usize> = (0..dim).map(|k| ((degree[k], labels[k]), k)).collect();
    // bimodule inner product of two basis vectors of the same component, in B coordinates
    let inner = |k: usize, l: usize| -> Option<(usize, usize)> {
        let (lk, ll) = (labels[k], labels[l]);
        if lk.block != ll.block || lk.row != ll.row {
            return None;
        }
        let j = fs.phi().image_at(degree[k]).perm[lk.block];
        let t = idx[&(0, BlockLabel { block: j, row: lk.col, col: ll.col })];
        Some((t, base_pos[&t]))
    };
    let mut star = Vec::with_capacity(dim);
    for k in 0..dim {
        let comp: Vec<usize> = (0..dim).filter(|&l| degree[l] == neg[degree[k]]).collect();
        let c = comp.len();
        let mut a = Matrix::zeros(c * d0, c, order);
        let mut rhs = vec![S::zero(order); c * d0];
        for (zi, &z) in comp.iter().enumerate() {
            for (fi, &f) in comp.iter().enumerate() {
                if let Some((_, p)) = inner(f, z) {
                    a.set(zi * d0 + p, fi, S::one(order));
                }
            }
            for (j, v) in &raw.table[k * dim + z] {
                let p = *base_pos.get(j).ok_or_else(|| Error::SolveFailed("product leaves the fixed algebra".into()))?;
                rhs[zi * d0 + p] = v.clone();
            }
        }
        let sol = a.solve(&rhs).ok_or_else(|| Error::SolveFailed(format!("no involution image for basis vector {k}")))?;
        star.push(comp.iter().zip(sol).map(|(&f, s)| (f, s.conj())).filter(|(_, s)| !s.is_zero()).collect());
    }
    Ok(star)
}

/// The involution of a built system, as images of the basis.
pub fn derive_involution(sys: &DynamicalSystem) -> Result<Vec<SparseVec>> {
    match (&sys.fs, &sys.labels, &sys.base) {
        (Some(fs), Some(labels), Some(base)) => derive_involution_from(&sys.raw, &sys.degree, labels, base, fs, &sys.group),
        _ => Ok(sys.raw.star.clone()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvolutionReport {
    pub involutive: bool,
    pub anti_multiplicative: bool,
    /// On the fixed algebra `i` is the matrix adjoint (when a block model is present).
    pub adjoint_on_base: Option<bool>,
    /// `⟨x,y⟩_B = P_0(m(i(x), y))`.
    pub inner_matches_projection: bool,
    /// `λ⁺_x = λ_{i(x)}`: `⟨m(x,y), z⟩_B = ⟨y, m(i(x), z)⟩_B`.
    pub lambda_adjoint: bool,
}

impl InvolutionReport {
    pub fn all_hold(&self) -> bool {
        self.involutive && self.anti_multiplicative && self.adjoint_on_base != Some(false) && self.inner_matches_projection && self.lambda_adjoint
    }
}

pub fn involution_checks(sys: &DynamicalSystem) -> InvolutionReport {
    let d = sys.dim();
    let e = |k: usize| sys.basis_vec(k);
    let involutive = (0..d).all(|k| sys.star(&sys.star(&e(k))) == e(k));
    let anti_multiplicative = (0..d).all(|k| {
        (0..d).all(|l| sys.star(sys.product_of_basis(k, l)) == sys.mul(&sys.star(&e(l)), &sys.star(&e(k))))
    });
    let adjoint_on_base = sys.base.as_ref().map(|b| {
        b.units.iter().all(|(k, _)| {
            let x = e(*k);
            b.to_element(&sys.star(&x), sys.order) == b.to_element(&x, sys.order).adjoint()
        })
    });
    let inner_matches_projection = (0..d).all(|k| (0..d).all(|l| sys.inner(&e(k), &e(l)) == sys.inner_via_star(&e(k), &e(l))));
    let lambda_adjoint = (0..d).all(|k| {
        let ik = sys.star(&e(k));
        (0..d).all(|l| (0..d).all(|m| sys.inner(sys.product_of_basis(k, l), &e(m)) == sys.inner(&e(l), &sys.mul(&ik, &e(m)))))
    });
    InvolutionReport { involutive, anti_multiplicative, adjoint_on_base, inner_matches_projection, lambda_adjoint }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotypicFullness {
    pub character: usize,
    pub component_dim: usize,
    /// Rank of `span{m(x,y): x ∈ A(−π), y ∈ A(π)}`.
    pub left_rank: usize,
    /// Rank of `span{m(y,x)}`.
    pub right_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessReport {
    pub fixed_dim: usize,
    pub isotypic: Vec<IsotypicFullness>,
    pub isotypic_full: bool,
    pub ellwood_rank: usize,
    pub ellwood_target: usize,
    pub ellwood_surjective: bool,
    pub crossed_rank: usize,
    pub crossed_target: usize,
    pub crossed_full: bool,
}

impl FreenessReport {
    pub fn agree(&self) -> bool {
        self.isotypic_full == self.ellwood_surjective && self.ellwood_surjective == self.crossed_full
    }

    pub fn free(&self) -> bool {
        self.isotypic_full && self.ellwood_surjective && self.crossed_full
    }

    /// Characters whose component is not full.
    pub fn failing_characters(&self) -> Vec<usize> {
        self.isotypic
            .iter()
            .filter(|c| c.left_rank != self.fixed_dim || c.right_rank != self.fixed_dim)
            .map(|c| c.character)
            .collect()
    }
}

/// The three freeness criteria, each computed from scratch.
pub fn freeness(sys: &DynamicalSystem) -> FreenessReport {
    let d = sys.dim();
    let g = sys.group.size();
    let neg = sys.group.neg_table();
    let fixed_dim = sys.fixed_dim();
    let isotypic: Vec<IsotypicFullness> = (0..g)
        .map(|pi| {
            let here = sys.basis_of_degree(pi);
            let there = sys.basis_of_degree(neg[pi]);
            let mut left = SpanBuilder::new(d);
            let mut right = SpanBuilder::new(d);
            for &x in &there {
                for &y in &here {
                    if left.rank() < fixed_dim {
                        left.insert(sys.product_of_basis(x, y).clone());
                    }
                    if right.rank() < fixed_dim {
                        right.insert(sys.product_of_basis(y, x).clone());
                    }
                }
            }
            IsotypicFullness { character: pi, component_dim: here.len(), left_rank: left.rank(), right_rank: right.rank() }
        })
        .collect();
    let isotypic_full = isotypic.iter().all(|c| c.left_rank == fixed_dim && c.right_rank == fixed_dim);
    let target = g * d;
    let spread = |v: &SparseVec, deg: usize| -> SparseVec {
        let mut out = SparseVec::new();
        for h in 0..g {
            let c = sys.pair(deg, h);
            for (&j, a) in v {
                out.insert(h * d + j, a * &c);
            }
        }
        out
    };
    // Ellwood: x ⊗ y ↦ (g ↦ x α_g(y))
    let mut ell = SpanBuilder::new(target);
    'outer: for x in 0..d {
        for y in 0..d {
            ell.insert(spread(sys.product_of_basis(x, y), sys.degree[y]));
            if ell.is_full() {
                break 'outer;
            }
        }
    }
    // crossed product: g ↦ x α_g(y^*)
    let mut cp = SpanBuilder::new(target);
    'outer2: for x in 0..d {
        for y in 0..d {
            let ys = sys.star(&sys.basis_vec(y));
            cp.insert(spread(&sys.mul(&sys.basis_vec(x), &ys), neg[sys.degree[y]]));
            if cp.is_full() {
                break 'outer2;
            }
        }
    }
    FreenessReport {
        fixed_dim,
        isotypic,
        isotypic_full,
        ellwood_rank: ell.rank(),
        ellwood_target: target,
        ellwood_surjective: ell.rank() == target,
        crossed_rank: cp.rank(),
        crossed_target: target,
        crossed_full: cp.rank() == target,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GnsReport {
    pub unit_inner_is_one: bool,
    /// `a ↦ λ_a` is injective.
    pub faithful: bool,
    /// `⟨x,x⟩_B ≥ 0` on sampled elements (needs a block model of the fixed algebra).
    pub positivity: Option<bool>,
    /// `⟨yx,yx⟩_B ≤ t·⟨x,x⟩_B` with a certified `t ≥ ‖⟨y,y⟩_B‖` within `2^-20` of it.
    pub inequality: Option<bool>,
    pub lambda_adjoint: bool,
    pub samples: usize,
}

impl GnsReport {
    pub fn all_hold(&self) -> bool {
        self.unit_inner_is_one && self.faithful && self.positivity != Some(false) && self.inequality != Some(false) && self.lambda_adjoint
    }
}

fn random_element<R: Rng>(sys: &DynamicalSystem, rng: &mut R) -> SparseVec {
    random_in(sys, &(0..sys.dim()).collect::<Vec<_>>(), rng)
}

fn random_in<R: Rng>(sys: &DynamicalSystem, support: &[usize], rng: &mut R) -> SparseVec {
    let o = sys.order as i64;
    support
        .iter()
        .copied()
        .filter_map(|k| {
            let c = rng.gen_range(-2i64..3);
            (c != 0).then(|| (k, S::root(sys.order, rng.gen_range(0..o)) * S::from_int(sys.order, c)))
        })
        .collect()
}

fn block_psd(b: &AlgebraElement) -> bool {
    b.blocks.iter().all(|m| m.is_psd())
}

/// Certified upper bound `t ≥ ‖b‖` for positive `b`, within `2^-20` of the norm.
fn norm_upper_bound(b: &AlgebraElement) -> BigRational {
    let fits = |t: &BigRational| {
        b.blocks.iter().all(|m| Matrix::identity(m.rows, m.order()).scale(&S::from_rational(1, t.clone())).sub(m).is_psd())
    };
    let tr: f64 = b.blocks.iter().map(|m| m.trace().approx().0).sum();
    let mut hi = BigRational::from_integer(BigInt::from(tr.max(0.0).ceil() as i64 + 1));
    while !fits(&hi) {
        hi = &hi * BigRational::from_integer(BigInt::from(2));
    }
    let mut lo = BigRational::from_integer(BigInt::from(0));
    let two = BigRational::from_integer(BigInt::from(2));
    for _ in 0..20 {
        let mid = (&lo + &hi) / &two;
        if fits(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn gns_checks<R: Rng>(sys: &DynamicalSystem, rng: &mut R, samples: usize) -> GnsReport {
    let d = sys.dim();
    let unit_inner_is_one = sys.inner(sys.unit(), sys.unit()) == *sys.unit();
    let mut span = SpanBuilder::new(d * d);
    for k in 0..d {
        let mut col = SparseVec::new();
        for l in 0..d {
            for (j, v) in sys.product_of_basis(k, l) {
                col.insert(l * d + j, v.clone());
            }
        }
        span.insert(col);
    }
    let faithful = span.rank() == d;
    let lambda_adjoint = involution_checks(sys).lambda_adjoint;
    let (positivity, inequality) = match &sys.base {
        Some(base) => {
            let to_b = |v: &SparseVec| base.to_element(v, sys.order);
            let mut pos = (0..d).all(|k| block_psd(&to_b(&sys.inner(&sys.basis_vec(k), &sys.basis_vec(k)))));
            let mut ineq = true;
            let g = sys.group.size();
            for _ in 0..samples {
                // the operator inequality is stated for homogeneous y ∈ A(π), x ∈ A(ρ)
                let x = random_in(sys, &sys.basis_of_degree(rng.gen_range(0..g)), rng);
                let y = random_in(sys, &sys.basis_of_degree(rng.gen_range(0..g)), rng);
                let xx = to_b(&sys.inner(&x, &x));
                let z = random_element(sys, rng);
                pos &= block_psd(&xx) && block_psd(&to_b(&sys.inner(&z, &z)));
                let yy = to_b(&sys.inner(&y, &y));
                let t = norm_upper_bound(&yy);
                let yx = sys.mul(&y, &x);
                let lhs = to_b(&sys.inner(&yx, &yx));
                let gap = xx.scale(&S::from_rational(1, t)).sub(&lhs);
                ineq &= block_psd(&gap);
            }
            (Some(pos), Some(ineq))
        }
        None => (None, None),
    };
    GnsReport { unit_inner_is_one, faithful, positivity, inequality, lambda_adjoint, samples }
}

/// `φ_A(π) = [A(π)]`, read off which central projections `A(π)` connects.
pub fn induced_phi(sys: &DynamicalSystem) -> Result<PicHomomorphism> {
    let rep = freeness(sys);
    if !rep.free() {
        return Err(Error::NotFree(format!("characters {:?} have non-full components", rep.failing_characters())));
    }
    let base = sys.base.as_ref().ok_or_else(|| Error::InvalidInput("fixed algebra has no block model".into()))?;
    let s = base.blocks.len();
    let proj: Vec<SparseVec> = (0..s).map(|i| base.central_projection(i, sys.order)).collect();
    let sigma_of = |pi: usize| -> Result<PicardElement> {
        let comp = sys.basis_of_degree(pi);
        let mut perm = Vec::with_capacity(s);
        for p in &proj {
            let targets: Vec<usize> = (0..s)
                .filter(|&j| comp.iter().any(|&k| !sys.mul(&sys.mul(p, &sys.basis_vec(k)), &proj[j]).is_empty()))
                .collect();
            if targets.len() != 1 {
                return Err(Error::InvalidInput(format!("A({pi}) does not induce a block permutation")));
            }
            perm.push(targets[0]);
        }
        PicardElement::new(perm)
    };
    let g = &sys.group;
    let gens = (0..g.rank()).map(|i| sigma_of(g.index_of(&g.generator(i)))).collect::<Result<Vec<_>>>()?;
    let alg = base.algebra(sys.order);
    let phi = PicHomomorphism::new(g, &alg, gens)?;
    for pi in 0..g.size() {
        if sigma_of(pi)? != phi.image_at(pi) {
            return Err(Error::InvalidInput(format!("[A({pi})] is not φ({pi}): not a homomorphism")));
        }
    }
    Ok(phi)
}

/// Read the factor system back off a system with block-model components.
pub fn extract_factor_system(sys: &DynamicalSystem) -> Result<FactorSystem> {
    let labels = sys.labels.as_ref().ok_or_else(|| Error::InvalidInput("system has no block-model components".into()))?;
    let phi = induced_phi(sys)?;
    let g = sys.group.size();
    let s = phi.algebra().block_count();
    let add = sys.group.add_table();
    let idx: HashMap<(usize, BlockLabel), usize> = (0..sys.dim()).map(|k| ((sys.degree[k], labels[k]), k)).collect();
    let at = |pi: usize, block: usize| idx.get(&(pi, BlockLabel { block, row: 0, col: 0 })).copied();
    let m = sys.order as u64;
    let mut vals = Vec::with_capacity(g * g * s);
    for p in 0..g {
        let sp = phi.image_at(p);
        for r in 0..g {
            for i in 0..s {
                let (x, y, z) = (at(p, i), at(r, sp.perm[i]), at(add[p][r], i));
                let (Some(x), Some(y), Some(z)) = (x, y, z) else {
                    return Err(Error::InvalidInput("missing matrix unit".into()));
                };
                let prod = sys.product_of_basis(x, y);
                let c = prod.get(&z).filter(|_| prod.len() == 1).ok_or_else(|| Error::InvalidInput("product is not a phase multiple".into()))?;
                let root = c.to_root_of_unity().ok_or_else(|| Error::InvalidInput("phase is not a root of unity".into()))?;
                vals.push(root.exponent_at(m)?);
            }
        }
    }
    let omega = crate::cohomology::Cochain::from_values(g, 2, s, m, vals)?;
    FactorSystem::new(&phi, omega)
}

/// Rebase an algebra with an arbitrary `G`-action onto a homogeneous basis.
/// `generators[j]` is the matrix (columns are images) of `α` at the `j`-th generator of `G`.
pub fn from_action(group: &FgAbelianGroup, alg: &RawAlgebra, generators: &[Matrix]) -> Result<DynamicalSystem> {
    from_action_with_basis(group, alg, generators).map(|(sys, _)| sys)
}

/// [`from_action`] together with the change of basis: column `j` holds the new basis
/// vector `e'_j` in the coordinates of `alg`.
pub fn from_action_with_basis(
    group: &FgAbelianGroup,
    alg: &RawAlgebra,
    generators: &[Matrix],
) -> Result<(DynamicalSystem, Matrix)> {
    if !group.is_finite() {
        return Err(Error::InfiniteGroup);
    }
    let dim = alg.dim;
    if generators.len() != group.rank() || generators.iter().any(|m| m.rows != dim || m.cols != dim) {
        return Err(Error::InvalidInput("one dim×dim matrix per generator required".into()));
    }
    let order = generators.iter().fold(num_integer::lcm(alg.order, group.exponent() as u32), |l, m| num_integer::lcm(l, m.order()));
    let gens: Vec<Matrix> = generators.iter().map(|m| m.embed(order)).collect();
    for (j, a) in gens.iter().enumerate() {
        for k in 0..dim {
            let ek = unit_vec(k, order);
            if apply_matrix(a, &alg.star_of(&ek)) != alg.star_of(&apply_matrix(a, &ek)) {
                return Err(Error::InvalidInput(format!("generator {} does not commute with the involution", j + 1)));
            }
            for l in 0..dim {
                let el = unit_vec(l, order);
                if apply_matrix(a, &alg.mul(&ek, &el)) != alg.mul(&apply_matrix(a, &ek), &apply_matrix(a, &el)) {
                    return Err(Error::InvalidInput(format!("generator {} is not multiplicative", j + 1)));
                }
            }
        }
        let mut p = Matrix::identity(dim, order);
        for _ in 0..group.factors()[j] {
            p = a.mul(&p);
        }
        if p != Matrix::identity(dim, order) {
            return Err(Error::InvalidInput(format!("generator {} violates its order relation", j + 1)));
        }
        for b in &gens[..j] {
            if a.mul(b) != b.mul(a) {
                return Err(Error::InvalidInput("generator actions do not commute".into()));
            }
        }
    }
    let g = group.size();
    let elements: Vec<Matrix> = (0..g)
        .map(|h| {
            let c = group.coords_of(h);
            let mut m = Matrix::identity(dim, order);
            for (a, &k) in gens.iter().zip(&c) {
                for _ in 0..k {
                    m = a.mul(&m);
                }
            }
            m
        })
        .collect();
    let e = group.exponent();
    let f = order as u64 / e;
    let coords: Vec<Vec<i64>> = (0..g).map(|i| group.coords_of(i)).collect();
    let inv_g = S::from_rational(order, BigRational::new(BigInt::from(1), BigInt::from(g as i64)));
    let mut columns: Vec<Vec<S>> = Vec::with_capacity(dim);
    let mut degree = Vec::with_capacity(dim);
    for pi in 0..g {
        let mut p = Matrix::zeros(dim, dim, order);
        for h in 0..g {
            let ph = S::root(order, -((group.pair_exponent(&coords[pi], &coords[h]) * f) as i64));
            p = p.add(&elements[h].scale(&ph));
        }
        let p = p.scale(&inv_g);
        let mut span = SpanBuilder::new(dim);
        for j in 0..dim {
            let col = p.column(j);
            if span.insert(sparse(&col)) {
                columns.push(col);
                degree.push(pi);
            }
        }
    }
    if columns.len() != dim {
        return Err(Error::InvalidInput("isotypic components do not span the algebra".into()));
    }
    let v = Matrix::from_fn(dim, dim, order, |i, j| columns[j][i].clone());
    let vinv = v.inverse().ok_or_else(|| Error::InvalidInput("isotypic basis is singular".into()))?;
    let to_new = |x: &SparseVec| sparse(&vinv.mul_vec(&dense(x, dim, order)));
    let cols: Vec<SparseVec> = columns.iter().map(|c| sparse(c)).collect();
    let mut table = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        for l in 0..dim {
            table.push(to_new(&alg.mul(&cols[k], &cols[l])));
        }
    }
    let star = cols.iter().map(|c| to_new(&alg.star_of(c))).collect();
    let sys = DynamicalSystem::from_parts(SystemParts {
        group: group.clone(),
        degree,
        algebra: RawAlgebra { order, dim, table, unit: to_new(&alg.unit), star },
        base: None,
        labels: None,
        fs: None,
    })?;
    Ok((sys, v))
}

/// Whether `images[k]` (the image of `e_k`) defines a `G`-equivariant *-isomorphism `a → b`.
pub fn is_equivariant_isomorphism(a: &DynamicalSystem, b: &DynamicalSystem, images: &[SparseVec]) -> bool {
    let d = a.dim();
    if b.dim() != d || images.len() != d || a.group.factors() != b.group.factors() {
        return false;
    }
    let mut span = SpanBuilder::new(d);
    for v in images {
        span.insert(v.clone());
    }
    if !span.is_full() {
        return false;
    }
    let map = |x: &SparseVec| -> SparseVec {
        let mut out = SparseVec::new();
        for (&k, c) in x {
            for (&j, v) in &images[k] {
                axpy(&mut out, j, c * v);
            }
        }
        out
    };
    if map(a.unit()) != *b.unit() {
        return false;
    }
    for k in 0..d {
        if map(&a.star(&a.basis_vec(k))) != b.star(&images[k]) {
            return false;
        }
        for h in 0..a.group.size() {
            if map(&a.act(h, &a.basis_vec(k))) != b.act(h, &images[k]) {
                return false;
            }
        }
        for l in 0..d {
            if map(a.product_of_basis(k, l)) != b.mul(&images[k], &images[l]) {
                return false;
            }
        }
    }
    true
}

/// The identity map on basis vectors, for comparing systems with the same basis.
pub fn identity_images(sys: &DynamicalSystem) -> Vec<SparseVec> {
    (0..sys.dim()).map(|k| sys.basis_vec(k)).collect()
}

/// Compare two systems' structure constants entry by entry.
pub fn same_structure(a: &DynamicalSystem, b: &DynamicalSystem) -> bool {
    a.group.factors() == b.group.factors()
        && a.degree == b.degree
        && a.raw.dim == b.raw.dim
        && a.raw.table == b.raw.table
        && a.raw.unit == b.raw.unit
        && a.raw.star == b.raw.star
}
