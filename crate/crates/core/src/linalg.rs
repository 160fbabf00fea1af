//! Dense and sparse exact linear algebra over `Q(ζ_L)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::interval::sign_real_part;
use crate::scalars::CyclotomicScalar as S;

#[derive(Clone)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    order: u32,
    data: Vec<S>,
}

/// Equality of values; the field order used to store the entries does not matter.
impl PartialEq for Matrix {
    fn eq(&self, o: &Matrix) -> bool {
        self.rows == o.rows && self.cols == o.cols && self.data == o.data
    }
}

impl Eq for Matrix {}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over Q(z{})", self.rows, self.cols, self.order)?;
        for i in 0..self.rows {
            let r: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", r.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, order: u32) -> Self {
        Matrix { rows, cols, order, data: vec![S::zero(order); rows * cols] }
    }

    pub fn identity(n: usize, order: u32) -> Self {
        let mut m = Self::zeros(n, n, order);
        for i in 0..n {
            m.set(i, i, S::one(order));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, order: u32, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j).embed(order).expect("entry order must divide matrix order"));
            }
        }
        Matrix { rows, cols, order, data }
    }

    /// Matrix unit `E_{ij}` of the given shape.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize, order: u32) -> Self {
        let mut m = Self::zeros(rows, cols, order);
        m.set(i, j, S::one(order));
        m
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        let v = if v.order() == self.order { v } else { v.embed(self.order).expect("scalar order mismatch") };
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    /// Re-express every entry at a larger order.
    pub fn embed(&self, order: u32) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            order,
            data: self.data.iter().map(|s| s.embed(order).expect("order must be a multiple")).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|s| s.is_zero())
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "shape mismatch in product");
        let order = num_integer::lcm(self.order, o.order);
        let mut out = Matrix::zeros(self.rows, o.cols, order);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        let p = a * b;
                        out.data[idx] += &p;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let order = num_integer::lcm(self.order, o.order);
        Matrix {
            rows: self.rows,
            cols: self.cols,
            order,
            data: self.data.iter().zip(&o.data).map(|(a, b)| (a + b).embed(order).unwrap()).collect(),
        }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        self.add(&o.scale(&S::from_int(1, -1)))
    }

    pub fn scale(&self, c: &S) -> Matrix {
        let order = num_integer::lcm(self.order, c.order());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            order,
            data: self.data.iter().map(|a| (a * c).embed(order).unwrap()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows, self.order);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows, self.order);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn trace(&self) -> S {
        let mut t = S::zero(self.order);
        for i in 0..self.rows.min(self.cols) {
            t += self.get(i, i);
        }
        t
    }

    pub fn kron(&self, o: &Matrix) -> Matrix {
        let order = num_integer::lcm(self.order, o.order);
        let mut out = Matrix::zeros(self.rows * o.rows, self.cols * o.cols, order);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        let b = o.get(k, l);
                        if !b.is_zero() {
                            out.set(i * o.rows + k, j * o.cols + l, a * b);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero(self.order);
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc += &(a * x);
                    }
                }
                acc
            })
            .collect()
    }

    /// Reduced row echelon form and list of pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else { continue };
            m.swap_rows(row, p);
            let inv = m.get(row, col).inv().expect("nonzero pivot");
            for j in col..m.cols {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r != row && !m.get(r, col).is_zero() {
                    let f = m.get(r, col).clone();
                    for j in col..m.cols {
                        let pv = m.get(row, j);
                        if !pv.is_zero() {
                            let v = m.get(r, j) - &(&f * pv);
                            m.set(r, j, v);
                        }
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : A x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<S>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![S::zero(self.order); self.cols];
                v[f] = S::one(self.order);
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(i, f);
                }
                v
            })
            .collect()
    }

    /// One solution of `A x = b`, if any.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        assert_eq!(b.len(), self.rows);
        let order = b.iter().fold(self.order, |l, s| num_integer::lcm(l, s.order()));
        let mut aug = Matrix::zeros(self.rows, self.cols + 1, order);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![S::zero(order); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r.get(i, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n, self.order);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, S::one(self.order));
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Matrix::from_fn(n, n, self.order, |i, j| r.get(i, n + j).clone()))
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows == self.cols && *self == self.adjoint()
    }

    /// Coefficients `c_0..c_n` of `det(λ I - A)` by Faddeev–LeVerrier.
    pub fn char_poly(&self) -> Vec<S> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut c = vec![S::zero(self.order); n + 1];
        c[n] = S::one(self.order);
        let mut mk = Matrix::zeros(n, n, self.order);
        let id = Matrix::identity(n, self.order);
        for k in 1..=n {
            mk = self.mul(&mk).add(&id.scale(&c[n - k + 1]));
            let t = self.mul(&mk).trace();
            let q = BigRational::new(BigInt::from(-1), BigInt::from(k as i64));
            c[n - k] = t * S::from_rational(self.order, q);
        }
        c
    }

    /// Certified positive semidefiniteness of a Hermitian matrix.
    pub fn is_psd(&self) -> bool {
        if !self.is_hermitian() {
            return false;
        }
        if self.rows == 0 {
            return true;
        }
        // det(λ - H) = Σ (-1)^k e_k λ^{n-k}; PSD iff every e_k >= 0
        let c = self.char_poly();
        let n = self.rows;
        (1..=n).all(|k| {
            let e = if k % 2 == 0 { c[n - k].clone() } else { -&c[n - k] };
            sign_real_part(&e) != Ordering::Less
        })
    }

    /// Certified test `‖A‖ <= bound` for the operator norm.
    pub fn norm_at_most(&self, bound: &BigRational) -> bool {
        let h = self.adjoint().mul(self);
        let b2 = bound * bound;
        Matrix::identity(h.rows, h.order).scale(&S::from_rational(1, b2)).sub(&h).is_psd()
    }
}

/// Sparse vector over `Q(ζ_L)`.
pub type SparseVec = BTreeMap<usize, S>;

/// Incrementally maintained span in echelon form.
#[derive(Clone, Debug)]
pub struct SpanBuilder {
    dim: usize,
    pivots: BTreeMap<usize, SparseVec>,
}

impl SpanBuilder {
    pub fn new(dim: usize) -> Self {
        SpanBuilder { dim, pivots: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_full(&self) -> bool {
        self.pivots.len() == self.dim
    }

    /// Reduce `v` against the current span; returns the residue (empty if `v` lies in it).
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        v.retain(|_, s| !s.is_zero());
        let mut cursor = 0;
        while let Some((&k, _)) = v.range(cursor..).next() {
            let Some(p) = self.pivots.get(&k) else {
                cursor = k + 1;
                continue;
            };
            let f = v[&k].clone();
            for (&j, s) in p {
                let e = v.entry(j).or_insert_with(|| S::zero(s.order()));
                *e -= &(&f * s);
                if e.is_zero() {
                    v.remove(&j);
                }
            }
            cursor = k + 1;
        }
        v
    }

    /// Add `v` to the span; `true` if the rank went up.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        if self.is_full() {
            return false;
        }
        let r = self.reduce(v);
        let Some((&lead, c)) = r.iter().next() else { return false };
        let inv = c.inv().expect("nonzero lead");
        let mut norm: SparseVec = r.into_iter().map(|(k, s)| (k, &s * &inv)).collect();
        // keep earlier pivots reduced against the new one so `reduce` stays a single pass
        for p in self.pivots.values_mut() {
            if let Some(f) = p.get(&lead).cloned() {
                for (&j, s) in &norm {
                    let e = p.entry(j).or_insert_with(|| S::zero(s.order()));
                    *e -= &(&f * s);
                    if e.is_zero() {
                        p.remove(&j);
                    }
                }
            }
        }
        norm.retain(|_, s| !s.is_zero());
        self.pivots.insert(lead, norm);
        true
    }

    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce(v).is_empty()
    }
}

/// Convert a dense vector into sparse form.
pub fn sparse(v: &[S]) -> SparseVec {
    v.iter().enumerate().filter(|(_, s)| !s.is_zero()).map(|(i, s)| (i, s.clone())).collect()
}

pub fn dense(v: &SparseVec, dim: usize, order: u32) -> Vec<S> {
    let mut out = vec![S::zero(order); dim];
    for (&k, s) in v {
        out[k] = s.clone();
    }
    out
}

pub fn is_zero_vec(v: &[S]) -> bool {
    v.iter().all(|s| s.is_zero())
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_fn(rows.len(), rows[0].len(), 1, |i, j| S::from_int(1, rows[i][j]))
    }

    #[test]
    fn rank_and_kernel() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        assert!(is_zero_vec(&a.mul_vec(&k[0])));
    }

    #[test]
    fn inverse_round_trip() {
        let i = S::root(4, 1);
        let a = Matrix::from_fn(2, 2, 4, |r, c| if r == c { S::one(4) } else { i.clone() });
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2, 4));
    }

    #[test]
    fn char_poly_of_diag() {
        // diag(1,2,3): λ^3 - 6λ^2 + 11λ - 6
        let a = m(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 3]]);
        let c: Vec<i64> = a
            .char_poly()
            .iter()
            .map(|s| s.as_rational().unwrap().to_integer().try_into().unwrap())
            .collect();
        assert_eq!(c, vec![-6, 11, -6, 1]);
    }

    #[test]
    fn psd_checks() {
        assert!(m(&[&[2, 1], &[1, 2]]).is_psd());
        assert!(m(&[&[1, 1], &[1, 1]]).is_psd());
        assert!(!m(&[&[1, 2], &[2, 1]]).is_psd());
        // [[1, i], [-i, 1]] is PSD with eigenvalues 0, 2
        let i = S::root(4, 1);
        let h = Matrix::from_fn(2, 2, 4, |r, c| match (r, c) {
            (0, 1) => i.clone(),
            (1, 0) => -&i,
            _ => S::one(4),
        });
        assert!(h.is_psd());
        // a rotation by 2π/5 has norm 1
        let z = S::root(5, 1);
        let u = Matrix::from_fn(1, 1, 5, |_, _| z.clone());
        assert!(u.norm_at_most(&rat(1, 1)));
        assert!(!u.norm_at_most(&rat(99, 100)));
    }

    #[test]
    fn span_builder_matches_dense_rank() {
        let a = m(&[&[1, 2, 3, 0], &[2, 4, 6, 0], &[1, 0, 1, 5], &[0, 2, 2, -5]]);
        let mut sb = SpanBuilder::new(4);
        for i in 0..4 {
            let row: Vec<S> = (0..4).map(|j| a.get(i, j).clone()).collect();
            sb.insert(sparse(&row));
        }
        assert_eq!(sb.rank(), a.rank());
    }
}
