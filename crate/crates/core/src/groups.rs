//! Finitely generated abelian groups stored as products of cyclic factors.
//!
//! A factor `0` stands for `Z`, a factor `d >= 1` for `Z/d`. Elements of finite
//! groups are enumerated in lexicographic order (last coordinate fastest), and that
//! enumeration index is what the cohomology and assembly code uses internally.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalars::RootOfUnity;
use crate::snf::{diagonalize, ModMatrix};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FgAbelianGroup {
    factors: Vec<u64>,
}

impl FgAbelianGroup {
    pub fn new(factors: Vec<u64>) -> Self {
        FgAbelianGroup { factors }
    }

    pub fn trivial() -> Self {
        FgAbelianGroup { factors: vec![] }
    }

    pub fn cyclic(n: u64) -> Self {
        FgAbelianGroup { factors: vec![n] }
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn is_finite(&self) -> bool {
        self.factors.iter().all(|&d| d > 0)
    }

    /// Number of `Z` factors.
    pub fn free_rank(&self) -> usize {
        self.factors.iter().filter(|&&d| d == 0).count()
    }

    /// `None` for infinite groups.
    pub fn order(&self) -> Option<u64> {
        if self.is_finite() {
            Some(self.factors.iter().product())
        } else {
            None
        }
    }

    /// Order of a finite group; panics on infinite groups.
    pub fn size(&self) -> usize {
        self.order().expect("finite group required") as usize
    }

    /// lcm of the finite factors (1 if there are none).
    pub fn exponent(&self) -> u64 {
        self.factors.iter().filter(|&&d| d > 0).fold(1, |l, &d| l.lcm(&d))
    }

    pub fn reduce(&self, coords: &[i64]) -> Vec<i64> {
        assert_eq!(coords.len(), self.rank(), "coordinate length mismatch");
        coords
            .iter()
            .zip(&self.factors)
            .map(|(&c, &d)| if d == 0 { c } else { c.rem_euclid(d as i64) })
            .collect()
    }

    pub fn element(&self, coords: &[i64]) -> GroupElement {
        GroupElement { parent: self.clone(), coords: self.reduce(coords) }
    }

    pub fn zero(&self) -> GroupElement {
        self.element(&vec![0; self.rank()])
    }

    pub fn enumerate(&self) -> Result<Vec<GroupElement>> {
        if !self.is_finite() {
            return Err(Error::InfiniteGroup);
        }
        Ok((0..self.size()).map(|i| self.element(&self.coords_of(i))).collect())
    }

    /// Coordinates of the element with lexicographic index `idx`.
    pub fn coords_of(&self, mut idx: usize) -> Vec<i64> {
        let mut c = vec![0i64; self.rank()];
        for (slot, &d) in c.iter_mut().zip(&self.factors).rev() {
            *slot = (idx % d as usize) as i64;
            idx /= d as usize;
        }
        c
    }

    /// Lexicographic index of reduced coordinates.
    pub fn index_of(&self, coords: &[i64]) -> usize {
        let r = self.reduce(coords);
        let mut idx = 0usize;
        for (&c, &d) in r.iter().zip(&self.factors) {
            idx = idx * d as usize + c as usize;
        }
        idx
    }

    /// The `i`-th standard generator.
    pub fn generator(&self, i: usize) -> Vec<i64> {
        let mut c = vec![0i64; self.rank()];
        c[i] = 1;
        c
    }

    pub fn add(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let s: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&s)
    }

    pub fn neg(&self, a: &[i64]) -> Vec<i64> {
        let s: Vec<i64> = a.iter().map(|x| -x).collect();
        self.reduce(&s)
    }

    /// Addition table on lexicographic indices.
    pub fn add_table(&self) -> Vec<Vec<usize>> {
        let n = self.size();
        let coords: Vec<Vec<i64>> = (0..n).map(|i| self.coords_of(i)).collect();
        (0..n)
            .map(|i| (0..n).map(|j| self.index_of(&self.add(&coords[i], &coords[j]))).collect())
            .collect()
    }

    pub fn neg_table(&self) -> Vec<usize> {
        (0..self.size()).map(|i| self.index_of(&self.neg(&self.coords_of(i)))).collect()
    }

    /// Exponent `e` with `⟨π, g⟩ = ζ_E^e`, `E = exponent()`.
    pub fn pair_exponent(&self, pi: &[i64], g: &[i64]) -> u64 {
        let e = self.exponent() as i128;
        let mut acc: i128 = 0;
        for ((&a, &b), &d) in pi.iter().zip(g).zip(&self.factors) {
            acc += (e / d as i128) * a as i128 * b as i128;
        }
        acc.rem_euclid(e) as u64
    }

    pub fn pair(&self, pi: &GroupElement, g: &GroupElement) -> Result<RootOfUnity> {
        if pi.parent != *self || g.parent != *self {
            return Err(Error::MismatchedParents);
        }
        if !self.is_finite() {
            return Err(Error::InfiniteGroup);
        }
        Ok(RootOfUnity::new(self.exponent(), self.pair_exponent(&pi.coords, &g.coords) as i64))
    }

    /// Order of an element.
    pub fn element_order(&self, a: &[i64]) -> u64 {
        let r = self.reduce(a);
        r.iter().zip(&self.factors).fold(1u64, |l, (&c, &d)| l.lcm(&(d / (c as u64).gcd(&d))))
    }

    /// Invariant factors `d_1 | d_2 | ...` (each > 1) of the torsion part, followed by
    /// one `0` per free factor.
    pub fn invariant_factors(&self) -> Vec<u64> {
        let finite: Vec<u64> = self.factors.iter().copied().filter(|&d| d > 1).collect();
        let mut out = invariant_factors_of_cyclic_product(&finite);
        out.extend(std::iter::repeat_n(0, self.free_rank()));
        out
    }

    /// Whether two groups are isomorphic.
    pub fn isomorphic(&self, other: &FgAbelianGroup) -> bool {
        self.invariant_factors() == other.invariant_factors()
    }

    pub fn subgroup_and_quotient(&self, generators: &[Vec<i64>]) -> Result<SubgroupQuotient> {
        if !self.is_finite() {
            return Err(Error::InfiniteGroup);
        }
        let k = self.rank();
        let e = self.exponent();
        if k == 0 {
            return Ok(SubgroupQuotient {
                ambient: self.clone(),
                subgroup: FgAbelianGroup::trivial(),
                embedding: vec![],
                quotient: FgAbelianGroup::trivial(),
                projection: vec![],
            });
        }
        let gens: Vec<Vec<i64>> = generators.iter().map(|g| self.reduce(g)).collect();
        // subgroup: column span of diag(E/d) S inside (Z/E)^k
        let mut subgroup_factors = Vec::new();
        let mut embedding = Vec::new();
        if !gens.is_empty() {
            let mut s = ModMatrix::zeros(k, gens.len(), e);
            for (j, g) in gens.iter().enumerate() {
                for i in 0..k {
                    s.set_i64(i, j, g[i] * (e / self.factors[i]) as i64);
                }
            }
            let d = diagonalize(&s, true);
            for (i, &lam) in d.diag.iter().enumerate() {
                if lam == e {
                    continue;
                }
                let ord = e / lam;
                if ord == 1 {
                    continue;
                }
                let col = d.u_inv.column(i);
                let coords: Vec<i64> = (0..k)
                    .map(|j| {
                        let w = (col[j] as u128 * lam as u128 % e as u128) as u64;
                        let step = e / self.factors[j];
                        debug_assert_eq!(w % step, 0);
                        (w / step) as i64
                    })
                    .collect();
                subgroup_factors.push(ord);
                embedding.push(coords);
            }
        }
        // quotient: cokernel of [diag(d) | S] over Z/E
        let mut r = ModMatrix::zeros(k, k + gens.len(), e);
        for i in 0..k {
            r.set(i, i, self.factors[i] % e);
        }
        for (j, g) in gens.iter().enumerate() {
            for i in 0..k {
                r.set_i64(i, k + j, g[i]);
            }
        }
        let d = diagonalize(&r, true);
        let mut quotient_factors = Vec::new();
        let mut projection = Vec::new();
        for (i, &lam) in d.diag.iter().enumerate() {
            if lam == 1 {
                continue;
            }
            quotient_factors.push(lam);
            projection.push((0..k).map(|j| d.u.get(i, j) as i64).collect());
        }
        Ok(SubgroupQuotient {
            ambient: self.clone(),
            subgroup: FgAbelianGroup::new(subgroup_factors),
            embedding,
            quotient: FgAbelianGroup::new(quotient_factors),
            projection,
        })
    }

    /// All characters of the subgroup described by `sq`, as a map from ambient
    /// character index to subgroup character index (restriction).
    pub fn restriction_map(&self, sq: &SubgroupQuotient) -> Vec<usize> {
        let h = &sq.subgroup;
        let hs: Vec<Vec<i64>> = (0..h.size()).map(|i| h.coords_of(i)).collect();
        let images: Vec<Vec<i64>> = hs.iter().map(|c| sq.embed(c)).collect();
        let eg = self.exponent();
        let eh = h.exponent();
        (0..self.size())
            .map(|p| {
                let pc = self.coords_of(p);
                let target: Vec<(u64, u64)> =
                    images.iter().map(|g| (self.pair_exponent(&pc, g), eg)).collect();
                (0..h.size())
                    .find(|&q| {
                        let qc = h.coords_of(q);
                        hs.iter().zip(&target).all(|(hc, &(te, to))| {
                            // compare te/to with he/eh as fractions of a full turn
                            let he = h.pair_exponent(&qc, hc);
                            te as u128 * eh as u128 == he as u128 * to as u128
                        })
                    })
                    .expect("every restricted character is a character of the subgroup")
            })
            .collect()
    }
}

/// Combine a product of cyclic groups into invariant factor form.
pub fn invariant_factors_of_cyclic_product(factors: &[u64]) -> Vec<u64> {
    use std::collections::BTreeMap;
    let mut by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &d in factors {
        let mut m = d;
        let mut p = 2;
        while p * p <= m {
            if m % p == 0 {
                let mut q = 1;
                while m % p == 0 {
                    m /= p;
                    q *= p;
                }
                by_prime.entry(p).or_default().push(q);
            }
            p += 1;
        }
        if m > 1 {
            by_prime.entry(m).or_default().push(m);
        }
    }
    let len = by_prime.values().map(|v| v.len()).max().unwrap_or(0);
    let mut out = vec![1u64; len];
    for v in by_prime.values_mut() {
        v.sort_unstable();
        // the largest prime powers go to the last invariant factors
        let offset = len - v.len();
        for (i, q) in v.iter().enumerate() {
            out[offset + i] *= q;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupElement {
    pub parent: FgAbelianGroup,
    pub coords: Vec<i64>,
}

impl GroupElement {
    pub fn add(&self, o: &GroupElement) -> Result<GroupElement> {
        if self.parent != o.parent {
            return Err(Error::MismatchedParents);
        }
        Ok(GroupElement { parent: self.parent.clone(), coords: self.parent.add(&self.coords, &o.coords) })
    }

    pub fn neg(&self) -> GroupElement {
        GroupElement { parent: self.parent.clone(), coords: self.parent.neg(&self.coords) }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// A subgroup `H ≤ G` together with `G/H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupQuotient {
    pub ambient: FgAbelianGroup,
    pub subgroup: FgAbelianGroup,
    /// Images in `G` of the standard generators of `H`.
    pub embedding: Vec<Vec<i64>>,
    pub quotient: FgAbelianGroup,
    /// Row `i` gives the linear form for quotient coordinate `i`.
    pub projection: Vec<Vec<i64>>,
}

impl SubgroupQuotient {
    pub fn embed(&self, h: &[i64]) -> Vec<i64> {
        let mut acc = vec![0i64; self.ambient.rank()];
        for (a, g) in h.iter().zip(&self.embedding) {
            for (x, y) in acc.iter_mut().zip(g) {
                *x += a * y;
            }
        }
        self.ambient.reduce(&acc)
    }

    pub fn project(&self, g: &[i64]) -> Vec<i64> {
        let c: Vec<i64> = self.projection.iter().map(|row| row.iter().zip(g).map(|(a, b)| a * b).sum()).collect();
        self.quotient.reduce(&c)
    }
}
