//! Cohomology of abelian groups with coefficients in permutation modules.
//!
//! For finite `Ĝ` the coefficient group is `(μ_N)^s ⊂ T^s`, with `Ĝ` permuting the
//! coordinates. Two flavours are offered:
//!
//! * [`discrete_cohomology`] treats `(Z/N)^s` as a discrete module.
//! * [`cohomology`] answers the question for circle coefficients: it reports the
//!   image of `H^n(Ĝ, μ_N^s)` in `H^n(Ĝ, T^s)`. A `μ_N` cocycle becomes trivial in
//!   `T` exactly when it is a coboundary of a `μ_{N|Ĝ|}`-valued cochain, so the
//!   image is computed inside `H^n(Ĝ, μ_{N|Ĝ|})`.
//!
//! Cochains are normalized and written additively: a value `e` in coordinate `i`
//! stands for `ζ_N^e` in block `i`.

use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::FgAbelianGroup;
use crate::snf::{diagonalize, diagonalize_with, solve, ModMatrix};

/// Largest matrix (entries) the finite-group routines will materialize.
const MAX_MATRIX_ENTRIES: usize = 60_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientModule {
    n: u64,
    s: usize,
    /// Permutation of `0..s` attached to each standard generator of the group.
    generators: Vec<Vec<usize>>,
    /// Permutation for every group element (finite groups only), by lexicographic index.
    action: Vec<Vec<usize>>,
}

fn is_perm(p: &[usize], s: usize) -> bool {
    let mut seen = vec![false; s];
    p.len() == s && p.iter().all(|&x| x < s && !std::mem::replace(&mut seen[x], true))
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // (a ∘ b)(i) = a(b(i))
    b.iter().map(|&i| a[i]).collect()
}

fn perm_power(p: &[usize], k: u64) -> Vec<usize> {
    let mut out: Vec<usize> = (0..p.len()).collect();
    for _ in 0..k {
        out = compose(p, &out);
    }
    out
}

impl CoefficientModule {
    pub fn trivial(group: &FgAbelianGroup, n: u64, s: usize) -> Self {
        let id: Vec<usize> = (0..s).collect();
        Self::from_generators(group, n, s, vec![id; group.rank()]).expect("identity action is valid")
    }

    /// Module whose `i`-th group generator acts by `generators[i]` (0-based images).
    pub fn from_generators(group: &FgAbelianGroup, n: u64, s: usize, generators: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("coefficient order must be positive".into()));
        }
        if generators.len() != group.rank() {
            return Err(Error::InvalidInput(format!(
                "expected {} generator permutations, got {}",
                group.rank(),
                generators.len()
            )));
        }
        for (i, p) in generators.iter().enumerate() {
            if !is_perm(p, s) {
                return Err(Error::InvalidInput(format!("generator {} does not act by a permutation of {s} points", i + 1)));
            }
            let d = group.factors()[i];
            if d > 0 && perm_power(p, d) != (0..s).collect::<Vec<_>>() {
                return Err(Error::InvalidInput(format!("generator {} acts with order not dividing {d}", i + 1)));
            }
        }
        for i in 0..generators.len() {
            for j in 0..i {
                if compose(&generators[i], &generators[j]) != compose(&generators[j], &generators[i]) {
                    return Err(Error::InvalidInput(format!("generators {} and {} act non-commutingly", j + 1, i + 1)));
                }
            }
        }
        let action = if group.is_finite() {
            (0..group.size())
                .map(|idx| {
                    let c = group.coords_of(idx);
                    let mut p: Vec<usize> = (0..s).collect();
                    for (g, &k) in generators.iter().zip(&c) {
                        p = compose(&perm_power(g, k as u64), &p);
                    }
                    p
                })
                .collect()
        } else {
            vec![]
        };
        Ok(CoefficientModule { n, s, generators, action })
    }

    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn blocks(&self) -> usize {
        self.s
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    /// Same action, different truncation.
    pub fn with_modulus(&self, n: u64) -> Self {
        CoefficientModule { n, ..self.clone() }
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.iter().all(|p| p.iter().enumerate().all(|(i, &x)| i == x))
    }

    /// Permutation `σ_π` for the element with lexicographic index `pi`.
    pub fn perm(&self, pi: usize) -> &[usize] {
        &self.action[pi]
    }

    /// `(π·u)_i = u_{σ_π(i)}`.
    pub fn act(&self, pi: usize, u: &[u64]) -> Vec<u64> {
        self.action[pi].iter().map(|&j| u[j]).collect()
    }

    /// Number of orbits of the generated permutation group on `0..s`.
    pub fn orbit_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.s).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for g in &self.generators {
            for (i, &j) in g.iter().enumerate() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
        (0..self.s).filter(|&i| find(&mut parent, i) == i).count()
    }
}

/// A normalized `n`-cochain `Ĝ^n → (Z/N)^s`, stored as a full table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cochain {
    pub degree: usize,
    pub group_order: usize,
    pub blocks: usize,
    pub modulus: u64,
    values: Vec<u64>,
}

impl Cochain {
    pub fn zero(group_order: usize, degree: usize, blocks: usize, modulus: u64) -> Self {
        let len = group_order.pow(degree as u32) * blocks;
        Cochain { degree, group_order, blocks, modulus, values: vec![0; len] }
    }

    pub fn zero_for(group: &FgAbelianGroup, coeff: &CoefficientModule, degree: usize) -> Self {
        Self::zero(group.size(), degree, coeff.s, coeff.n)
    }

    pub fn from_fn(
        group_order: usize,
        degree: usize,
        blocks: usize,
        modulus: u64,
        f: impl Fn(&[usize]) -> Vec<i64>,
    ) -> Self {
        let mut c = Self::zero(group_order, degree, blocks, modulus);
        for t in 0..group_order.pow(degree as u32) {
            let args = c.args_of(t);
            let v = f(&args);
            assert_eq!(v.len(), blocks);
            for (k, x) in v.into_iter().enumerate() {
                c.values[t * blocks + k] = x.rem_euclid(modulus as i64) as u64;
            }
        }
        c
    }

    /// Rebuild from the raw table (lexicographic in the arguments, then block).
    pub fn from_values(group_order: usize, degree: usize, blocks: usize, modulus: u64, values: Vec<u64>) -> Result<Self> {
        if values.len() != group_order.pow(degree as u32) * blocks {
            return Err(Error::InvalidInput("cochain table has the wrong length".into()));
        }
        Ok(Cochain { degree, group_order, blocks, modulus, values: values.into_iter().map(|v| v % modulus).collect() })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    fn tuple_index(&self, args: &[usize]) -> usize {
        assert_eq!(args.len(), self.degree);
        args.iter().fold(0, |acc, &a| acc * self.group_order + a)
    }

    pub fn args_of(&self, mut t: usize) -> Vec<usize> {
        let mut a = vec![0; self.degree];
        for slot in a.iter_mut().rev() {
            *slot = t % self.group_order;
            t /= self.group_order;
        }
        a
    }

    pub fn get(&self, args: &[usize]) -> &[u64] {
        let t = self.tuple_index(args);
        &self.values[t * self.blocks..(t + 1) * self.blocks]
    }

    pub fn set(&mut self, args: &[usize], v: &[i64]) {
        let t = self.tuple_index(args);
        for (k, &x) in v.iter().enumerate() {
            self.values[t * self.blocks + k] = x.rem_euclid(self.modulus as i64) as u64;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    pub fn is_normalized(&self) -> bool {
        (0..self.group_order.pow(self.degree as u32))
            .all(|t| !self.args_of(t).contains(&0) || self.values[t * self.blocks..(t + 1) * self.blocks].iter().all(|&v| v == 0))
    }

    fn same_shape(&self, o: &Cochain) {
        assert_eq!(
            (self.degree, self.group_order, self.blocks, self.modulus),
            (o.degree, o.group_order, o.blocks, o.modulus),
            "cochain shape mismatch"
        );
    }

    pub fn add(&self, o: &Cochain) -> Cochain {
        self.same_shape(o);
        let m = self.modulus;
        Cochain { values: self.values.iter().zip(&o.values).map(|(a, b)| (a + b) % m).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &Cochain) -> Cochain {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Cochain {
        let m = self.modulus;
        Cochain { values: self.values.iter().map(|a| (m - a) % m).collect(), ..self.clone() }
    }

    pub fn scale(&self, k: i64) -> Cochain {
        let m = self.modulus as i128;
        Cochain {
            values: self.values.iter().map(|&a| (a as i128 * k as i128).rem_euclid(m) as u64).collect(),
            ..self.clone()
        }
    }

    /// Image under `μ_N ⊂ μ_{N'}` (exponents multiplied by `N'/N`).
    pub fn embed(&self, target: u64) -> Result<Cochain> {
        if !target.is_multiple_of(self.modulus) {
            return Err(Error::InvalidInput(format!("{target} is not a multiple of {}", self.modulus)));
        }
        let f = target / self.modulus;
        Ok(Cochain { modulus: target, values: self.values.iter().map(|a| a * f).collect(), ..self.clone() })
    }

    /// Reinterpret a cochain whose values lie in the subgroup `μ_{N'} ⊂ μ_N`.
    pub fn restrict_modulus(&self, target: u64) -> Option<Cochain> {
        if !self.modulus.is_multiple_of(target) {
            return None;
        }
        let f = self.modulus / target;
        if self.values.iter().any(|a| a % f != 0) {
            return None;
        }
        Some(Cochain { modulus: target, values: self.values.iter().map(|a| a / f).collect(), ..self.clone() })
    }

    /// Coordinates on the normalized basis (tuples of non-identity arguments).
    pub fn normalized_coords(&self) -> Vec<u64> {
        let g1 = self.group_order - 1;
        let count = g1.pow(self.degree as u32);
        let mut out = Vec::with_capacity(count * self.blocks);
        for t in 0..count {
            let args = normalized_args(t, self.degree, g1);
            out.extend_from_slice(self.get(&args));
        }
        out
    }

    pub fn from_normalized_coords(group_order: usize, degree: usize, blocks: usize, modulus: u64, v: &[u64]) -> Self {
        let mut c = Self::zero(group_order, degree, blocks, modulus);
        let g1 = group_order - 1;
        for t in 0..g1.pow(degree as u32) {
            let args = normalized_args(t, degree, g1);
            let idx = c.tuple_index(&args);
            for k in 0..blocks {
                c.values[idx * blocks + k] = v[t * blocks + k] % modulus;
            }
        }
        c
    }
}

fn normalized_args(mut t: usize, degree: usize, g1: usize) -> Vec<usize> {
    let mut a = vec![0; degree];
    for slot in a.iter_mut().rev() {
        *slot = t % g1 + 1;
        t /= g1;
    }
    a
}

fn normalized_index(args: &[usize], g1: usize) -> Option<usize> {
    let mut t = 0;
    for &a in args {
        if a == 0 {
            return None;
        }
        t = t * g1 + (a - 1);
    }
    Some(t)
}

fn check_finite(group: &FgAbelianGroup, coeff: &CoefficientModule) -> Result<()> {
    if !group.is_finite() {
        return Err(Error::InfiniteGroup);
    }
    if coeff.action.len() != group.size() {
        return Err(Error::InvalidInput("coefficient module does not belong to this group".into()));
    }
    Ok(())
}

/// The bar differential applied to a cochain (exponent form).
pub fn differential(group: &FgAbelianGroup, coeff: &CoefficientModule, c: &Cochain) -> Result<Cochain> {
    check_finite(group, coeff)?;
    let add = group.add_table();
    let n = c.degree;
    let s = c.blocks;
    let m = c.modulus as i64;
    let out = Cochain::from_fn(c.group_order, n + 1, s, c.modulus, |args| {
        let mut v = vec![0i64; s];
        let first = coeff.act(args[0], c.get(&args[1..]));
        for k in 0..s {
            v[k] += first[k] as i64;
        }
        for j in 0..n {
            let mut merged: Vec<usize> = Vec::with_capacity(n);
            merged.extend_from_slice(&args[..j]);
            merged.push(add[args[j]][args[j + 1]]);
            merged.extend_from_slice(&args[j + 2..]);
            let sign = if (j + 1) % 2 == 0 { 1 } else { -1 };
            for (k, x) in c.get(&merged).iter().enumerate() {
                v[k] += sign * *x as i64;
            }
        }
        let sign = if (n + 1).is_multiple_of(2) { 1 } else { -1 };
        for (k, x) in c.get(&args[..n]).iter().enumerate() {
            v[k] += sign * *x as i64;
        }
        v.iter().map(|x| x.rem_euclid(m)).collect()
    });
    Ok(out)
}

/// Matrix of `d_n` on normalized coordinates, over `Z/modulus`.
pub fn differential_matrix(group: &FgAbelianGroup, coeff: &CoefficientModule, n: usize, modulus: u64) -> Result<ModMatrix> {
    check_finite(group, coeff)?;
    let g = group.size();
    let g1 = g - 1;
    let s = coeff.s;
    let cols = g1.pow(n as u32) * s;
    let rows = g1.pow(n as u32 + 1) * s;
    if rows.saturating_mul(cols) > MAX_MATRIX_ENTRIES {
        return Err(Error::TooLarge(format!("differential d_{n} would be {rows}x{cols}")));
    }
    let add = group.add_table();
    let mut d = ModMatrix::zeros(rows, cols, modulus);
    for t in 0..g1.pow(n as u32 + 1) {
        let args = normalized_args(t, n + 1, g1);
        for i in 0..s {
            let row = t * s + i;
            let src = normalized_index(&args[1..], g1).unwrap();
            d.add_to(row, src * s + coeff.action[args[0]][i], 1);
            for j in 0..n {
                let mut merged: Vec<usize> = Vec::with_capacity(n);
                merged.extend_from_slice(&args[..j]);
                merged.push(add[args[j]][args[j + 1]]);
                merged.extend_from_slice(&args[j + 2..]);
                if let Some(col) = normalized_index(&merged, g1) {
                    let sign = if (j + 1) % 2 == 0 { 1 } else { -1 };
                    d.add_to(row, col * s + i, sign);
                }
            }
            let col = normalized_index(&args[..n], g1).unwrap();
            let sign = if (n + 1).is_multiple_of(2) { 1 } else { -1 };
            d.add_to(row, col * s + i, sign);
        }
    }
    Ok(d)
}

/// Generators of the cocycle group `Z^n` over `Z/R`, with a coordinate map.
#[derive(Clone, Debug)]
struct CocycleBasis {
    gens: Vec<Vec<u64>>,
    orders: Vec<u64>,
    v_inv: ModMatrix,
    slots: Vec<usize>,
    scale: Vec<u64>,
}

impl CocycleBasis {
    fn new(d: &ModMatrix) -> Self {
        let r = d.modulus;
        let dg = diagonalize_with(d, false, true, d.cols);
        let mut gens = Vec::new();
        let mut orders = Vec::new();
        let mut slots = Vec::new();
        let mut scale = Vec::new();
        for i in 0..d.cols {
            let lam = dg.diag.get(i).copied().unwrap_or(r);
            let (c, ord) = if lam == r { (1, r) } else { (r / lam, lam) };
            if ord == 1 {
                continue;
            }
            let col = dg.v.column(i);
            gens.push(col.iter().map(|&x| ((x as u128 * c as u128) % r as u128) as u64).collect());
            orders.push(ord);
            slots.push(i);
            scale.push(c);
        }
        CocycleBasis { gens, orders, v_inv: dg.v_inv, slots, scale }
    }

    /// Coordinates of a cocycle in terms of `gens`.
    fn coords(&self, x: &[u64]) -> Vec<u64> {
        let y = self.v_inv.mul_vec(x);
        self.slots
            .iter()
            .zip(&self.scale)
            .zip(&self.orders)
            .map(|((&i, &c), &o)| {
                debug_assert_eq!(y[i] % c, 0, "vector is not a cocycle");
                (y[i] / c) % o
            })
            .collect()
    }
}

/// `H^n` with discrete `Z/R` coefficients, presented as `⊕ Z/λ_j`.
#[derive(Clone, Debug)]
struct DiscreteH {
    modulus: u64,
    cocycles: CocycleBasis,
    /// Kept summands: (row index in `u_rel`, order).
    summands: Vec<(usize, u64)>,
    u_rel: ModMatrix,
    u_rel_inv: ModMatrix,
}

impl DiscreteH {
    fn new(group: &FgAbelianGroup, coeff: &CoefficientModule, n: usize, r: u64) -> Result<Self> {
        let dn = differential_matrix(group, coeff, n, r)?;
        let cocycles = CocycleBasis::new(&dn);
        let t = cocycles.gens.len();
        let image_cols: Vec<Vec<u64>> = if n == 0 {
            vec![]
        } else {
            let dp = differential_matrix(group, coeff, n - 1, r)?;
            (0..dp.cols).map(|j| cocycles.coords(&dp.column(j))).collect()
        };
        let mut rel = ModMatrix::zeros(t, t + image_cols.len(), r);
        for (i, &o) in cocycles.orders.iter().enumerate() {
            rel.set(i, i, o % r);
        }
        for (j, col) in image_cols.iter().enumerate() {
            for i in 0..t {
                rel.set(i, t + j, col[i]);
            }
        }
        let dg = diagonalize(&rel, true);
        let summands = dg
            .diag
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 1)
            .map(|(i, &l)| (i, l))
            .collect();
        Ok(DiscreteH { modulus: r, cocycles, summands, u_rel: dg.u, u_rel_inv: dg.u_inv })
    }

    fn factors(&self) -> Vec<u64> {
        self.summands.iter().map(|&(_, o)| o).collect()
    }

    /// Class of a cocycle (normalized coordinates, modulus `R`) in `⊕ Z/λ_j`.
    fn class(&self, x: &[u64]) -> Vec<u64> {
        let t = self.cocycles.coords(x);
        let w = self.u_rel.mul_vec(&t);
        self.summands.iter().map(|&(i, o)| w[i] % o).collect()
    }

    /// A cocycle representing generator `j` of the presentation.
    fn generator(&self, j: usize) -> Vec<u64> {
        let (i, _) = self.summands[j];
        let r = self.modulus;
        let dim = self.cocycles.v_inv.rows;
        let mut x = vec![0u64; dim];
        for (k, g) in self.cocycles.gens.iter().enumerate() {
            let a = self.u_rel_inv.get(k, i);
            if a == 0 {
                continue;
            }
            for (xi, gi) in x.iter_mut().zip(g) {
                *xi = ((*xi as u128 + a as u128 * *gi as u128) % r as u128) as u64;
            }
        }
        x
    }
}

/// Which coefficient group a result refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coefficients {
    /// `(Z/N)^s` as a discrete module.
    Discrete,
    /// `T^s`, computed through `μ_N^s`.
    Circle,
}

/// Serializable description of `H^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologySummary {
    pub degree: usize,
    pub group: Vec<u64>,
    pub coefficients: Coefficients,
    pub blocks: usize,
    pub action: Vec<Vec<usize>>,
    /// `None` for closed forms.
    pub truncation: Option<u64>,
    pub invariant_factors: Vec<u64>,
    /// Dimension of the connected (torus) part, nonzero only for closed forms and degree 0.
    pub torus_dimension: usize,
    /// Representative cocycles as raw tables, one per invariant factor.
    pub representatives: Vec<Vec<u64>>,
    pub description: String,
}

#[derive(Clone, Debug)]
pub struct CohomologyResult {
    pub degree: usize,
    pub group: FgAbelianGroup,
    pub coeff: CoefficientModule,
    pub coefficients: Coefficients,
    pub truncation: Option<u64>,
    pub invariant_factors: Vec<u64>,
    pub torus_dimension: usize,
    pub representatives: Vec<Cochain>,
    pub description: String,
    solver: Option<Solver>,
}

#[derive(Clone, Debug)]
struct Solver {
    /// Presentation in which classes are computed (modulus `N` or `N|Ĝ|`).
    ambient: DiscreteH,
    /// Multiplier from truncation modulus into the ambient modulus.
    lift: u64,
    /// Ambient class coordinates of each representative.
    rep_classes: Vec<Vec<u64>>,
}

impl CohomologyResult {
    pub fn order(&self) -> Option<u64> {
        if self.torus_dimension > 0 {
            None
        } else {
            Some(self.invariant_factors.iter().product())
        }
    }

    pub fn is_trivial_group(&self) -> bool {
        self.torus_dimension == 0 && self.invariant_factors.is_empty()
    }

    pub fn summary(&self) -> CohomologySummary {
        CohomologySummary {
            degree: self.degree,
            group: self.group.factors().to_vec(),
            coefficients: self.coefficients,
            blocks: self.coeff.s,
            action: self.coeff.generators.clone(),
            truncation: self.truncation,
            invariant_factors: self.invariant_factors.clone(),
            torus_dimension: self.torus_dimension,
            representatives: self.representatives.iter().map(|c| c.values.clone()).collect(),
            description: self.description.clone(),
        }
    }

    fn solver(&self) -> Result<&Solver> {
        self.solver.as_ref().ok_or_else(|| Error::UnsupportedGroup("closed-form result has no class solver".into()))
    }

    /// Coordinates of the class of a cocycle with respect to the representatives.
    pub fn class_of(&self, c: &Cochain) -> Result<Vec<u64>> {
        let sv = self.solver()?;
        let n = self.coeff.n;
        if c.modulus != n || c.degree != self.degree {
            return Err(Error::InvalidInput("cochain does not match the truncation or degree".into()));
        }
        if !differential(&self.group, &self.coeff, c)?.is_zero() {
            return Err(Error::NotACocycle);
        }
        let x: Vec<u64> = c.normalized_coords().iter().map(|&v| v * sv.lift).collect();
        let q = sv.ambient.class(&x);
        if self.invariant_factors.is_empty() {
            return if q.iter().all(|&v| v == 0) {
                Ok(vec![])
            } else {
                Err(Error::InvalidInput("cochain has a class outside the truncated image".into()))
            };
        }
        // Σ a_j rep_j = q inside ⊕ Z/λ_r; scale each row into Z/E
        let lam = sv.ambient.factors();
        let e = lam.iter().fold(1u64, |l, &x| l.lcm(&x));
        let k = self.invariant_factors.len();
        let mut a = ModMatrix::zeros(lam.len(), k, e);
        let mut b = vec![0u64; lam.len()];
        for (r, &l) in lam.iter().enumerate() {
            let f = e / l;
            for j in 0..k {
                a.set(r, j, sv.rep_classes[j][r] * f);
            }
            b[r] = q[r] * f % e;
        }
        let sol = solve(&a, &b).ok_or_else(|| Error::InvalidInput("class lies outside the truncated image".into()))?;
        Ok(sol.iter().zip(&self.invariant_factors).map(|(&x, &f)| x % f).collect())
    }

    pub fn is_trivial_class(&self, c: &Cochain) -> Result<bool> {
        Ok(self.class_of(c)?.iter().all(|&x| x == 0))
    }

    /// Cocycle representing the class with the given coordinates.
    pub fn representative(&self, coords: &[u64]) -> Cochain {
        let mut acc = Cochain::zero(self.group.size(), self.degree, self.coeff.s, self.coeff.n);
        for (c, r) in coords.iter().zip(&self.representatives) {
            acc = acc.add(&r.scale(*c as i64));
        }
        acc
    }

    /// Every element of the group as a coordinate vector, lexicographically.
    pub fn enumerate_classes(&self) -> Vec<Vec<u64>> {
        let total: u64 = self.invariant_factors.iter().product();
        (0..total)
            .map(|mut idx| {
                let mut v = vec![0u64; self.invariant_factors.len()];
                for (slot, &f) in v.iter_mut().zip(&self.invariant_factors).rev() {
                    *slot = idx % f;
                    idx /= f;
                }
                v
            })
            .collect()
    }
}

fn add_mod(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| (x + y) % m).collect()
}

fn scale_mod(a: &[u64], k: u64, m: u64) -> Vec<u64> {
    a.iter().map(|x| ((*x as u128 * k as u128) % m as u128) as u64).collect()
}

/// A generator of a finite abelian group together with its cocycle and class data.
#[derive(Clone, Debug)]
struct Gen {
    order: u64,
    cocycle: Vec<u64>,
    class: Vec<u64>,
}

/// Regroup cyclic generators into invariant-factor form via primary decomposition.
fn normalize_generators(gens: Vec<Gen>, cm: u64, qm: &[u64]) -> Vec<Gen> {
    use std::collections::BTreeMap;
    let add_class = |a: &[u64], b: &[u64]| -> Vec<u64> { a.iter().zip(b).zip(qm).map(|((x, y), m)| (x + y) % m).collect() };
    let scale_class = |a: &[u64], k: u64| -> Vec<u64> { a.iter().zip(qm).map(|(x, m)| (x * (k % m)) % m).collect() };
    let mut by_prime: BTreeMap<u64, Vec<Gen>> = BTreeMap::new();
    for g in gens {
        let mut m = g.order;
        let mut p = 2;
        let mut primes = Vec::new();
        while p * p <= m {
            if m % p == 0 {
                let mut q = 1;
                while m % p == 0 {
                    m /= p;
                    q *= p;
                }
                primes.push((p, q));
            }
            p += 1;
        }
        if m > 1 {
            primes.push((m, m));
        }
        for (p, q) in primes {
            let k = g.order / q;
            by_prime.entry(p).or_default().push(Gen {
                order: q,
                cocycle: scale_mod(&g.cocycle, k, cm),
                class: scale_class(&g.class, k),
            });
        }
    }
    let len = by_prime.values().map(|v| v.len()).max().unwrap_or(0);
    let dim = by_prime.values().next().map(|v| v[0].cocycle.len()).unwrap_or(0);
    let mut out: Vec<Gen> =
        (0..len).map(|_| Gen { order: 1, cocycle: vec![0; dim], class: vec![0; qm.len()] }).collect();
    for v in by_prime.values_mut() {
        v.sort_by_key(|g| g.order);
        let off = len - v.len();
        for (i, g) in v.iter().enumerate() {
            let slot = &mut out[off + i];
            slot.order *= g.order;
            slot.cocycle = add_mod(&slot.cocycle, &g.cocycle, cm);
            slot.class = add_class(&slot.class, &g.class);
        }
    }
    out
}

/// Subgroup of `⊕ Z/qm_r` generated by classes, with generators tracked as cocycles.
fn generated_subgroup(classes: &[Vec<u64>], cocycles: &[Vec<u64>], cm: u64, qm: &[u64]) -> Vec<Gen> {
    if qm.is_empty() || classes.is_empty() {
        return vec![];
    }
    let e = qm.iter().fold(1u64, |l, &x| l.lcm(&x));
    let mut s = ModMatrix::zeros(qm.len(), classes.len(), e);
    for (j, c) in classes.iter().enumerate() {
        for (r, &m) in qm.iter().enumerate() {
            s.set(r, j, c[r] * (e / m));
        }
    }
    let dg = diagonalize_with(&s, false, true, s.cols);
    let dim = cocycles[0].len();
    let mut out = Vec::new();
    for (i, &lam) in dg.diag.iter().enumerate() {
        let order = if lam == e { 1 } else { e / lam };
        if order == 1 {
            continue;
        }
        let mut cocycle = vec![0u64; dim];
        let mut class = vec![0u64; qm.len()];
        for k in 0..classes.len() {
            let a = dg.v.get(k, i);
            if a == 0 {
                continue;
            }
            cocycle = add_mod(&cocycle, &scale_mod(&cocycles[k], a, cm), cm);
            for (r, &m) in qm.iter().enumerate() {
                class[r] = (class[r] + (a % m) * classes[k][r]) % m;
            }
        }
        out.push(Gen { order, cocycle, class });
    }
    out
}

fn finite_result(
    group: &FgAbelianGroup,
    coeff: &CoefficientModule,
    n: usize,
    coefficients: Coefficients,
) -> Result<CohomologyResult> {
    check_finite(group, coeff)?;
    let nn = coeff.n;
    let g = group.size();
    let s = coeff.s;
    if n == 0 && coefficients == Coefficients::Circle {
        return Ok(CohomologyResult {
            degree: 0,
            group: group.clone(),
            coeff: coeff.clone(),
            coefficients,
            truncation: Some(nn),
            invariant_factors: vec![],
            torus_dimension: coeff.orbit_count(),
            representatives: vec![],
            description: format!("invariant subtorus of dimension {}", coeff.orbit_count()),
            solver: None,
        });
    }
    let (ambient, lift) = match coefficients {
        Coefficients::Discrete => (DiscreteH::new(group, coeff, n, nn)?, 1),
        Coefficients::Circle => (DiscreteH::new(group, coeff, n, nn * g as u64)?, g as u64),
    };
    let qm = ambient.factors();
    let gens: Vec<Gen> = match coefficients {
        Coefficients::Discrete => (0..qm.len())
            .map(|j| {
                let cocycle = ambient.generator(j);
                let class = ambient.class(&cocycle);
                Gen { order: qm[j], cocycle, class }
            })
            .collect(),
        Coefficients::Circle => {
            let dn = differential_matrix(group, coeff, n, nn)?;
            let z = CocycleBasis::new(&dn);
            let classes: Vec<Vec<u64>> = z.gens.iter().map(|c| ambient.class(&scale_mod(c, lift, nn * lift))).collect();
            generated_subgroup(&classes, &z.gens, nn, &qm)
        }
    };
    let gens = normalize_generators(gens, nn, &qm);
    let invariant_factors: Vec<u64> = gens.iter().map(|g| g.order).collect();
    let representatives: Vec<Cochain> =
        gens.iter().map(|gn| Cochain::from_normalized_coords(g, n, s, nn, &gn.cocycle)).collect();
    let rep_classes = gens.iter().map(|g| g.class.clone()).collect();
    let description = if invariant_factors.is_empty() {
        "trivial".to_string()
    } else {
        invariant_factors.iter().map(|d| format!("Z_{d}")).collect::<Vec<_>>().join(" x ")
    };
    Ok(CohomologyResult {
        degree: n,
        group: group.clone(),
        coeff: coeff.clone(),
        coefficients,
        truncation: Some(nn),
        invariant_factors,
        torus_dimension: 0,
        representatives,
        description,
        solver: Some(Solver { ambient, lift, rep_classes }),
    })
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn closed_form(group: &FgAbelianGroup, coeff: &CoefficientModule, n: usize) -> Result<CohomologyResult> {
    let r = group.rank();
    let torus = if r == 1 {
        // Z: invariants and coinvariants of a permutation torus both have one circle per orbit
        if n <= 1 {
            coeff.orbit_count()
        } else {
            0
        }
    } else if coeff.is_trivial() {
        coeff.s * binomial(r, n)
    } else {
        return Err(Error::UnsupportedGroup("Z^r with r > 1 requires a trivial action".into()));
    };
    let description = if torus == 0 {
        "trivial".to_string()
    } else if n == 2 && r >= 2 {
        format!("torus of dimension {torus} (alternating bicharacters, one angle per pair of generators and block)")
    } else {
        format!("torus of dimension {torus}")
    };
    Ok(CohomologyResult {
        degree: n,
        group: group.clone(),
        coeff: coeff.clone(),
        coefficients: Coefficients::Circle,
        truncation: None,
        invariant_factors: vec![],
        torus_dimension: torus,
        representatives: vec![],
        description,
        solver: None,
    })
}

/// `H^n(Ĝ, T^s)`, truncated to `μ_N` for finite groups, closed forms for `Z^r`.
pub fn cohomology(group: &FgAbelianGroup, coeff: &CoefficientModule, n: usize) -> Result<CohomologyResult> {
    if group.is_finite() {
        finite_result(group, coeff, n, Coefficients::Circle)
    } else if group.factors().iter().all(|&d| d == 0) {
        closed_form(group, coeff, n)
    } else {
        Err(Error::UnsupportedGroup("mixed finite and infinite cyclic factors".into()))
    }
}

/// `H^n(Ĝ, (Z/N)^s)` with discrete coefficients.
pub fn discrete_cohomology(group: &FgAbelianGroup, coeff: &CoefficientModule, n: usize) -> Result<CohomologyResult> {
    finite_result(group, coeff, n, Coefficients::Discrete)
}

/// Outcome of recomputing at a doubled truncation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilization {
    pub truncation: u64,
    pub doubled: u64,
    pub order: u64,
    pub doubled_order: u64,
    /// The natural map between the two truncations is an isomorphism.
    pub agree: bool,
}

/// Compute at truncation `N` and at `2N`, and compare along the natural map.
pub fn stabilized_cohomology(
    group: &FgAbelianGroup,
    coeff: &CoefficientModule,
    n: usize,
) -> Result<(CohomologyResult, Stabilization)> {
    let base = cohomology(group, coeff, n)?;
    if base.truncation.is_none() || n == 0 {
        let st = Stabilization { truncation: coeff.n, doubled: 2 * coeff.n, order: 0, doubled_order: 0, agree: true };
        return Ok((base, st));
    }
    let doubled = cohomology(group, &coeff.with_modulus(2 * coeff.n), n)?;
    let order = base.order().unwrap();
    let doubled_order = doubled.order().unwrap();
    let agree = order == doubled_order && {
        let images: Vec<Vec<u64>> = base
            .representatives
            .iter()
            .map(|r| doubled.class_of(&r.embed(2 * coeff.n).unwrap()))
            .collect::<Result<_>>()?;
        let qg = FgAbelianGroup::new(doubled.invariant_factors.clone());
        let gens: Vec<Vec<i64>> = images.iter().map(|v| v.iter().map(|&x| x as i64).collect()).collect();
        qg.subgroup_and_quotient(&gens)?.subgroup.size() as u64 == doubled_order
    };
    let st = Stabilization { truncation: coeff.n, doubled: 2 * coeff.n, order, doubled_order, agree };
    if !agree {
        return Err(Error::StabilizationFailed(format!(
            "degree {n}: order {order} at N={} but {doubled_order} at N={}",
            coeff.n,
            2 * coeff.n
        )));
    }
    Ok((base, st))
}

/// A primitive `h` with `dh = ω` in circle coefficients. The witness takes values in
/// `μ_{N|Ĝ|}` and carries that modulus.
pub fn is_coboundary(group: &FgAbelianGroup, coeff: &CoefficientModule, omega: &Cochain) -> Result<Option<Cochain>> {
    coboundary_solve(group, coeff, omega, group.size() as u64)
}

/// A primitive `h` with `dh = ω` using only `μ_N`-valued cochains.
pub fn is_coboundary_discrete(
    group: &FgAbelianGroup,
    coeff: &CoefficientModule,
    omega: &Cochain,
) -> Result<Option<Cochain>> {
    coboundary_solve(group, coeff, omega, 1)
}

fn coboundary_solve(
    group: &FgAbelianGroup,
    coeff: &CoefficientModule,
    omega: &Cochain,
    lift: u64,
) -> Result<Option<Cochain>> {
    check_finite(group, coeff)?;
    let coeff = coeff.with_modulus(omega.modulus);
    if !differential(group, &coeff, omega)?.is_zero() {
        return Err(Error::NotACocycle);
    }
    let n = omega.degree;
    let m = omega.modulus * lift;
    if n == 0 {
        return Ok(if omega.is_zero() { Some(Cochain::zero(group.size(), 0, coeff.s, m)) } else { None });
    }
    let d = differential_matrix(group, &coeff, n - 1, m)?;
    let rhs: Vec<u64> = omega.normalized_coords().iter().map(|&v| v * lift).collect();
    Ok(solve(&d, &rhs).map(|x| Cochain::from_normalized_coords(group.size(), n - 1, coeff.s, m, &x)))
}

/// Generators of the normalized `n`-cocycles over `μ_N`.
pub fn cocycle_generators(group: &FgAbelianGroup, coeff: &CoefficientModule, n: usize) -> Result<Vec<Cochain>> {
    let d = differential_matrix(group, coeff, n, coeff.n)?;
    let z = CocycleBasis::new(&d);
    Ok(z.gens.iter().map(|v| Cochain::from_normalized_coords(group.size(), n, coeff.s, coeff.n, v)).collect())
}

/// A random normalized cocycle: a random combination of cocycle generators.
pub fn random_cocycle<R: Rng>(
    group: &FgAbelianGroup,
    coeff: &CoefficientModule,
    n: usize,
    rng: &mut R,
) -> Result<Cochain> {
    let gens = cocycle_generators(group, coeff, n)?;
    let mut acc = Cochain::zero_for(group, coeff, n);
    for g in gens {
        acc = acc.add(&g.scale(rng.gen_range(0..coeff.n) as i64));
    }
    Ok(acc)
}

/// A random normalized cochain (no cocycle condition).
pub fn random_cochain<R: Rng>(group: &FgAbelianGroup, coeff: &CoefficientModule, n: usize, rng: &mut R) -> Cochain {
    let mut c = Cochain::zero_for(group, coeff, n);
    let g = group.size();
    for t in 0..g.pow(n as u32) {
        let args = c.args_of(t);
        if args.contains(&0) {
            continue;
        }
        let v: Vec<i64> = (0..coeff.s).map(|_| rng.gen_range(0..coeff.n) as i64).collect();
        c.set(&args, &v);
    }
    c
}

/// `ω(π,ρ) = Σ_{ij} b_ij π_i ρ_j`, the same matrix in every block.
pub fn bicharacter(group: &FgAbelianGroup, blocks: usize, modulus: u64, b: &[Vec<i64>]) -> Result<Cochain> {
    let k = group.rank();
    if b.len() != k || b.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidInput(format!("bicharacter matrix must be {k}x{k}")));
    }
    let f = group.factors();
    for i in 0..k {
        for j in 0..k {
            let v = b[i][j].rem_euclid(modulus as i64) as u64;
            if !(v * f[i]).is_multiple_of(modulus) || !(v * f[j]).is_multiple_of(modulus) {
                return Err(Error::InvalidInput(format!(
                    "entry ({},{}) = {} is not well defined on Z_{} x Z_{} with values in Z_{modulus}",
                    i + 1,
                    j + 1,
                    b[i][j],
                    f[i],
                    f[j]
                )));
            }
        }
    }
    let g = group.size();
    Ok(Cochain::from_fn(g, 2, blocks, modulus, |a| {
        let (p, r) = (group.coords_of(a[0]), group.coords_of(a[1]));
        let mut v = 0i64;
        for i in 0..k {
            for j in 0..k {
                v += b[i][j] * p[i] * r[j];
            }
        }
        vec![v; blocks]
    }))
}

/// The splitting of `H²` into symmetric (abelian-extension) and alternating parts
/// for a trivial module.
#[derive(Clone, Debug)]
pub struct SplitH2 {
    group: FgAbelianGroup,
    coeff: CoefficientModule,
}

pub fn split_h2(group: &FgAbelianGroup, coeff: &CoefficientModule) -> Result<SplitH2> {
    check_finite(group, coeff)?;
    if !coeff.is_trivial() {
        return Err(Error::NontrivialAction);
    }
    Ok(SplitH2 { group: group.clone(), coeff: coeff.clone() })
}

impl SplitH2 {
    /// `λ(ω)(π,ρ) = ω(π,ρ) − ω(ρ,π)`.
    pub fn lambda(&self, omega: &Cochain) -> Cochain {
        let g = self.group.size();
        let m = omega.modulus as i64;
        Cochain::from_fn(g, 2, omega.blocks, omega.modulus, |a| {
            omega.get(&[a[0], a[1]]).iter().zip(omega.get(&[a[1], a[0]])).map(|(&x, &y)| (x as i64 - y as i64).rem_euclid(m)).collect()
        })
    }

    /// Upper-triangular bicharacter with `s(β)(e_i, e_j) = β(e_i, e_j)` for `i < j`.
    pub fn section(&self, beta: &Cochain) -> Cochain {
        let k = self.group.rank();
        let g = self.group.size();
        let gens: Vec<usize> = (0..k).map(|i| self.group.index_of(&self.group.generator(i))).collect();
        let b: Vec<Vec<Vec<u64>>> =
            (0..k).map(|i| (0..k).map(|j| beta.get(&[gens[i], gens[j]]).to_vec()).collect()).collect();
        let group = &self.group;
        Cochain::from_fn(g, 2, beta.blocks, beta.modulus, |a| {
            let (p, r) = (group.coords_of(a[0]), group.coords_of(a[1]));
            (0..beta.blocks)
                .map(|blk| {
                    let mut v = 0i64;
                    for i in 0..k {
                        for j in i + 1..k {
                            v += b[i][j][blk] as i64 * p[i] * r[j];
                        }
                    }
                    v
                })
                .collect()
        })
    }

    /// Symmetric part `ω − s(λ(ω))`.
    pub fn pr_ab(&self, omega: &Cochain) -> Cochain {
        omega.sub(&self.section(&self.lambda(omega)))
    }

    /// Whether `pr_ab(ω)` is trivial in circle coefficients.
    pub fn pr_ab_is_trivial(&self, omega: &Cochain) -> Result<bool> {
        let c = self.coeff.with_modulus(omega.modulus);
        Ok(is_coboundary(&self.group, &c, &self.pr_ab(omega))?.is_some())
    }

    /// Whether a 2-cochain is an alternating biadditive form.
    pub fn is_alternating_form(&self, beta: &Cochain) -> bool {
        let g = self.group.size();
        let add = self.group.add_table();
        let m = beta.modulus;
        (0..g).all(|a| beta.get(&[a, a]).iter().all(|&v| v == 0))
            && (0..g).all(|a| {
                (0..g).all(|b| {
                    (0..g).all(|c| {
                        let lhs = beta.get(&[add[a][b], c]);
                        let rhs = add_mod(beta.get(&[a, c]), beta.get(&[b, c]), m);
                        lhs == rhs.as_slice()
                    })
                })
            })
    }
}
