//! Diagonalization of matrices over `Z/M`.
//!
//! Produces invertible `U`, `V` with `U A V = Λ` diagonal. Each diagonal entry is
//! normalized to a divisor of `M` (with `M` itself standing for zero) but no
//! divisibility chain is enforced; callers that need invariant factors sort them
//! out through primary decomposition.

use num_integer::Integer;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    pub rows: usize,
    pub cols: usize,
    pub modulus: u64,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(rows: usize, cols: usize, modulus: u64) -> Self {
        assert!(modulus > 0);
        ModMatrix { rows, cols, modulus, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize, modulus: u64) -> Self {
        let mut m = Self::zeros(n, n, modulus);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>], cols: usize, modulus: u64) -> Self {
        let mut m = Self::zeros(rows.len(), cols, modulus);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            for (j, &v) in r.iter().enumerate() {
                m.set_i64(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.modulus;
    }

    pub fn set_i64(&mut self, i: usize, j: usize, v: i64) {
        let m = self.modulus as i128;
        self.data[i * self.cols + j] = (v as i128).rem_euclid(m) as u64;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: i64) {
        let cur = self.get(i, j) as i128;
        let m = self.modulus as i128;
        self.data[i * self.cols + j] = (cur + v as i128).rem_euclid(m) as u64;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn mul(&self, o: &ModMatrix) -> ModMatrix {
        assert_eq!(self.cols, o.rows);
        assert_eq!(self.modulus, o.modulus);
        let m = self.modulus as u128;
        let mut out = ModMatrix::zeros(self.rows, o.cols, self.modulus);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b != 0 {
                        let idx = i * out.cols + j;
                        out.data[idx] = ((out.data[idx] as u128 + a as u128 * b as u128) % m) as u64;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len());
        let m = self.modulus as u128;
        (0..self.rows)
            .map(|i| {
                let mut acc: u128 = 0;
                for (a, b) in self.row(i).iter().zip(v) {
                    acc = (acc + *a as u128 * *b as u128) % m;
                }
                acc as u64
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }
}

#[inline]
fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
fn lin(a: u64, x: u64, b: u64, y: u64, m: u64) -> u64 {
    ((a as u128 * x as u128 + b as u128 * y as u128) % m as u128) as u64
}

fn neg(a: u64, m: u64) -> u64 {
    (m - a % m) % m
}

/// Inverse of `a` modulo `m` when it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// A unit `u` of `Z/m` with `u * a ≡ gcd(a, m)`.
pub fn normalizing_unit(a: u64, m: u64) -> u64 {
    let g = a.gcd(&m);
    if g == 0 || m == 1 {
        return 1;
    }
    let mp = m / g;
    let u0 = inv_mod((a / g) % mp, mp).expect("coprime by construction");
    let mut u = u0;
    while u.gcd(&m) != 1 {
        u += mp;
    }
    u % m
}

type T2 = [[u64; 2]; 2];

fn rows2(a: &mut ModMatrix, i: usize, j: usize, t: &T2) {
    let m = a.modulus;
    for c in 0..a.cols {
        let x = a.get(i, c);
        let y = a.get(j, c);
        if x == 0 && y == 0 {
            continue;
        }
        a.data[i * a.cols + c] = lin(t[0][0], x, t[0][1], y, m);
        a.data[j * a.cols + c] = lin(t[1][0], x, t[1][1], y, m);
    }
}

fn cols2(a: &mut ModMatrix, i: usize, j: usize, t: &T2) {
    let m = a.modulus;
    for r in 0..a.rows {
        let x = a.get(r, i);
        let y = a.get(r, j);
        if x == 0 && y == 0 {
            continue;
        }
        a.data[r * a.cols + i] = lin(x, t[0][0], y, t[1][0], m);
        a.data[r * a.cols + j] = lin(x, t[0][1], y, t[1][1], m);
    }
}

fn inv2(t: &T2, m: u64) -> T2 {
    let det = (mulmod(t[0][0], t[1][1], m) + m - mulmod(t[0][1], t[1][0], m)) % m;
    let d = inv_mod(det, m).expect("elementary transform must be invertible");
    [
        [mulmod(d, t[1][1], m), mulmod(d, neg(t[0][1], m), m)],
        [mulmod(d, neg(t[1][0], m), m), mulmod(d, t[0][0], m)],
    ]
}

#[derive(Clone, Debug)]
pub struct Diagonalization {
    /// Diagonal entries, each a divisor of the modulus; the modulus itself means zero.
    pub diag: Vec<u64>,
    pub u: ModMatrix,
    pub u_inv: ModMatrix,
    pub v: ModMatrix,
    pub v_inv: ModMatrix,
    /// The transformed matrix `U A V`, including any augmented columns.
    pub reduced: ModMatrix,
}

impl Diagonalization {
    pub fn modulus(&self) -> u64 {
        self.u.modulus
    }

    /// Number of diagonal entries that are nonzero mod `M`.
    pub fn nonzero_count(&self) -> usize {
        let m = self.modulus();
        self.diag.iter().filter(|&&d| d != m).count()
    }
}

struct Tracker {
    a: ModMatrix,
    u: Option<(ModMatrix, ModMatrix)>,
    v: Option<(ModMatrix, ModMatrix)>,
}

impl Tracker {
    fn row_op(&mut self, i: usize, j: usize, t: T2) {
        rows2(&mut self.a, i, j, &t);
        if let Some((u, ui)) = self.u.as_mut() {
            rows2(u, i, j, &t);
            cols2(ui, i, j, &inv2(&t, u.modulus));
        }
    }

    fn col_op(&mut self, i: usize, j: usize, t: T2) {
        cols2(&mut self.a, i, j, &t);
        if let Some((v, vi)) = self.v.as_mut() {
            cols2(v, i, j, &t);
            rows2(vi, i, j, &inv2(&t, v.modulus));
        }
    }

    fn scale_row(&mut self, i: usize, s: u64) {
        let m = self.a.modulus;
        let si = inv_mod(s, m).unwrap();
        for c in 0..self.a.cols {
            let v = self.a.get(i, c);
            self.a.data[i * self.a.cols + c] = mulmod(v, s, m);
        }
        if let Some((u, ui)) = self.u.as_mut() {
            for c in 0..u.cols {
                let v = u.get(i, c);
                u.data[i * u.cols + c] = mulmod(v, s, m);
            }
            for r in 0..ui.rows {
                let v = ui.get(r, i);
                ui.data[r * ui.cols + i] = mulmod(v, si, m);
            }
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.row_op(i, j, [[0, 1], [1, 0]]);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            self.col_op(i, j, [[0, 1], [1, 0]]);
        }
    }

    /// Row transform on (p, r) making the entry at (p, col) the gcd and zeroing (r, col).
    fn clear_below(&mut self, p: usize, r: usize, col: usize) {
        let m = self.a.modulus;
        let a = self.a.get(p, col);
        let b = self.a.get(r, col);
        if b == 0 {
            return;
        }
        if a != 0 && b.is_multiple_of(a) {
            let q = b / a;
            self.row_op(p, r, [[1, 0], [neg(q, m), 1]]);
            return;
        }
        let e = (a as i128).extended_gcd(&(b as i128));
        let g = e.gcd as u64;
        let s = e.x.rem_euclid(m as i128) as u64;
        let t = e.y.rem_euclid(m as i128) as u64;
        self.row_op(p, r, [[s, t], [neg(b / g, m), a / g]]);
    }

    fn clear_right(&mut self, p: usize, c: usize, row: usize) {
        let m = self.a.modulus;
        let a = self.a.get(row, p);
        let b = self.a.get(row, c);
        if b == 0 {
            return;
        }
        if a != 0 && b.is_multiple_of(a) {
            let q = b / a;
            self.col_op(p, c, [[1, neg(q, m)], [0, 1]]);
            return;
        }
        let e = (a as i128).extended_gcd(&(b as i128));
        let g = e.gcd as u64;
        let s = e.x.rem_euclid(m as i128) as u64;
        let t = e.y.rem_euclid(m as i128) as u64;
        // new col_p = s col_p + t col_c, new col_c = -(b/g) col_p + (a/g) col_c
        self.col_op(p, c, [[s, neg(b / g, m)], [t, a / g]]);
    }

    fn normalize_pivot(&mut self, t: usize) {
        let a = self.a.get(t, t);
        if a == 0 {
            return;
        }
        let u = normalizing_unit(a, self.a.modulus);
        if u != 1 {
            self.scale_row(t, u);
        }
    }
}

/// Diagonalize `a` over `Z/M`. `track` controls whether `U`, `V` and inverses are kept.
pub fn diagonalize(a: &ModMatrix, track: bool) -> Diagonalization {
    diagonalize_with(a, track, track, a.cols)
}

/// Diagonalize with separate control over which transforms are tracked. Only the
/// first `pivot_cols` columns take part in pivoting; the remaining columns are
/// carried along by the row operations (an augmented right-hand side).
pub fn diagonalize_with(a: &ModMatrix, track_u: bool, track_v: bool, pivot_cols: usize) -> Diagonalization {
    let m = a.modulus;
    let (r, c) = (a.rows, pivot_cols);
    let mut tr = Tracker {
        a: a.clone(),
        u: track_u.then(|| (ModMatrix::identity(r, m), ModMatrix::identity(r, m))),
        v: track_v.then(|| (ModMatrix::identity(a.cols, m), ModMatrix::identity(a.cols, m))),
    };
    let n = r.min(c);
    let mut diag = Vec::with_capacity(n);
    for t in 0..n {
        // choose the entry with the smallest gcd with M as pivot
        let mut best: Option<(u64, usize, usize)> = None;
        'search: for i in t..r {
            for j in t..c {
                let v = tr.a.get(i, j);
                if v != 0 {
                    let g = v.gcd(&m);
                    if best.is_none_or(|(bg, _, _)| g < bg) {
                        best = Some((g, i, j));
                        if g == 1 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((_, pi, pj)) = best else {
            diag.extend(std::iter::repeat_n(m, n - t));
            break;
        };
        tr.swap_rows(t, pi);
        tr.swap_cols(t, pj);
        tr.normalize_pivot(t);
        loop {
            for i in t + 1..r {
                if tr.a.get(i, t) != 0 {
                    tr.clear_below(t, i, t);
                    tr.normalize_pivot(t);
                }
            }
            for j in t + 1..c {
                if tr.a.get(t, j) != 0 {
                    tr.clear_right(t, j, t);
                    tr.normalize_pivot(t);
                }
            }
            if !(t + 1..r).any(|i| tr.a.get(i, t) != 0) {
                break;
            }
        }
        let p = tr.a.get(t, t);
        diag.push(if p == 0 { m } else { p.gcd(&m) });
    }
    let empty = || (ModMatrix::zeros(0, 0, m), ModMatrix::zeros(0, 0, m));
    let (u, u_inv) = tr.u.unwrap_or_else(empty);
    let (v, v_inv) = tr.v.unwrap_or_else(empty);
    Diagonalization { diag, u, u_inv, v, v_inv, reduced: tr.a }
}

/// Solve `A x = b` over `Z/M`, returning one solution if any exists.
pub fn solve(a: &ModMatrix, b: &[u64]) -> Option<Vec<u64>> {
    assert_eq!(b.len(), a.rows);
    let m = a.modulus;
    let mut aug = ModMatrix::zeros(a.rows, a.cols + 1, m);
    for i in 0..a.rows {
        for j in 0..a.cols {
            aug.data[i * aug.cols + j] = a.get(i, j);
        }
        aug.data[i * aug.cols + a.cols] = b[i] % m;
    }
    let d = diagonalize_with(&aug, false, true, a.cols);
    // Λ y = U b sits in the last column of the reduced matrix; then x = V y
    let mut y = vec![0u64; a.cols + 1];
    for i in 0..a.rows {
        let val = d.reduced.get(i, a.cols);
        if i >= d.diag.len() || d.diag[i] == m {
            if val != 0 {
                return None;
            }
            continue;
        }
        let g = d.diag[i];
        if !val.is_multiple_of(g) {
            return None;
        }
        y[i] = val / g;
    }
    let x = d.v.mul_vec(&y);
    Some(x[..a.cols].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn diag_matrix(d: &Diagonalization, r: usize, c: usize, m: u64) -> ModMatrix {
        let mut out = ModMatrix::zeros(r, c, m);
        for (i, &g) in d.diag.iter().enumerate() {
            out.set(i, i, g % m);
        }
        out
    }

    #[test]
    fn small_example() {
        let a = ModMatrix::from_rows(&[vec![2, 4], vec![6, 8]], 2, 12);
        let d = diagonalize(&a, true);
        assert_eq!(d.u.mul(&a).mul(&d.v), diag_matrix(&d, 2, 2, 12));
        let mut g = d.diag.clone();
        g.sort();
        // over Z the invariants are 2, 4; mod 12 they stay 2, 4
        assert_eq!(g, vec![2, 4]);
    }

    #[test]
    fn solve_mod() {
        let a = ModMatrix::from_rows(&[vec![2, 0], vec![0, 3]], 2, 6);
        assert!(solve(&a, &[4, 3]).is_some());
        assert!(solve(&a, &[1, 0]).is_none());
    }

    proptest! {
        #[test]
        fn uav_is_diagonal(
            m in 2u64..40,
            r in 1usize..5,
            c in 1usize..5,
            seed in proptest::collection::vec(0i64..1000, 25),
        ) {
            let rows: Vec<Vec<i64>> = (0..r).map(|i| (0..c).map(|j| seed[i * 5 + j]).collect()).collect();
            let a = ModMatrix::from_rows(&rows, c, m);
            let d = diagonalize(&a, true);
            prop_assert_eq!(d.u.mul(&a).mul(&d.v), diag_matrix(&d, r, c, m));
            prop_assert_eq!(d.u.mul(&d.u_inv), ModMatrix::identity(r, m));
            prop_assert_eq!(d.v.mul(&d.v_inv), ModMatrix::identity(c, m));
            for &g in &d.diag {
                prop_assert_eq!(m % g, 0);
            }
            // the image has size prod(M / g_i); compare against enumeration for tiny cases
            if c <= 3 && m <= 12 {
                let mut img = std::collections::HashSet::new();
                let total = (m as usize).pow(c as u32);
                for idx in 0..total {
                    let mut x = vec![0u64; c];
                    let mut t = idx;
                    for xi in x.iter_mut() {
                        *xi = (t % m as usize) as u64;
                        t /= m as usize;
                    }
                    img.insert(a.mul_vec(&x));
                }
                let expected: u64 = d.diag.iter().map(|&g| m / g).product();
                prop_assert_eq!(img.len() as u64, expected);
            }
        }
    }
}
