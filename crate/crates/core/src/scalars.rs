//! Exact arithmetic in cyclotomic fields `Q(ζ_L)` and in groups of roots of unity.
//!
//! Elements are stored in the power basis `1, ζ, …, ζ^{φ(L)-1}` of `Q[x]/(Φ_L(x))`,
//! so two scalars of the same order are equal iff their coefficient vectors are.
//! Coefficients are arbitrary-precision rationals; nothing here rounds.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("order {target} is not a multiple of {source_order}")]
    NotAMultiple { source_order: u64, target: u64 },
    #[error("invalid scalar order 0")]
    ZeroOrder,
    #[error("cannot parse scalar `{0}`")]
    Parse(String),
}

/// Precomputed data for one cyclotomic field.
#[derive(Debug)]
struct FieldCtx {
    order: u32,
    degree: usize,
    /// `power[k]` holds the power-basis coordinates of `ζ^k`, `0 <= k < order`.
    power: Vec<Vec<i64>>,
}

thread_local! {
    static CTX: RefCell<HashMap<u32, Rc<FieldCtx>>> = RefCell::new(HashMap::new());
}

fn ctx(order: u32) -> Rc<FieldCtx> {
    CTX.with(|c| {
        if let Some(f) = c.borrow().get(&order) {
            return f.clone();
        }
        let f = Rc::new(FieldCtx::new(order));
        c.borrow_mut().insert(order, f.clone());
        f
    })
}

/// Integer polynomial division of `num` by monic `den` (low degree first).
fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return vec![0];
    }
    let mut quot = vec![0i64; rem.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        if c != 0 {
            for (j, d) in den.iter().enumerate() {
                rem[k + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

/// Coefficients of the cyclotomic polynomial `Φ_n`, lowest degree first.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    assert!(n > 0);
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = poly_div_exact(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

pub fn euler_phi(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

impl FieldCtx {
    fn new(order: u32) -> Self {
        let phi = cyclotomic_polynomial(order);
        let degree = phi.len() - 1;
        let mut power = Vec::with_capacity(order as usize);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        for _ in 0..order {
            power.push(cur.clone());
            // multiply by x and reduce the top coefficient with Φ (monic)
            let top = cur[degree - 1];
            let mut next = vec![0i64; degree];
            next[1..degree].copy_from_slice(&cur[..(degree - 1)]);
            if top != 0 {
                for j in 0..degree {
                    next[j] -= top * phi[j];
                }
            }
            cur = next;
        }
        FieldCtx { order, degree, power }
    }
}

/// An element of `Q(ζ_L)`.
#[derive(Clone, Debug)]
pub struct CyclotomicScalar {
    order: u32,
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl CyclotomicScalar {
    pub fn zero(order: u32) -> Self {
        let d = ctx(order.max(1)).degree;
        CyclotomicScalar { order: order.max(1), coeffs: vec![BigRational::zero(); d] }
    }

    pub fn one(order: u32) -> Self {
        Self::from_rational(order, BigRational::one())
    }

    pub fn from_int(order: u32, n: i64) -> Self {
        Self::from_rational(order, rat(n))
    }

    pub fn from_rational(order: u32, q: BigRational) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = q;
        z
    }

    /// `ζ_L^k`.
    pub fn root(order: u32, k: i64) -> Self {
        let c = ctx(order.max(1));
        let idx = k.rem_euclid(c.order as i64) as usize;
        CyclotomicScalar {
            order: c.order,
            coeffs: c.power[idx].iter().map(|&v| rat(v)).collect(),
        }
    }

    /// Build from power-basis coefficients; the vector must have length `φ(L)`.
    pub fn from_coeffs(order: u32, coeffs: Vec<BigRational>) -> Result<Self, ScalarError> {
        if order == 0 {
            return Err(ScalarError::ZeroOrder);
        }
        let d = ctx(order).degree;
        if coeffs.len() != d {
            return Err(ScalarError::Parse(format!(
                "expected {d} coefficients for order {order}, got {}",
                coeffs.len()
            )));
        }
        Ok(CyclotomicScalar { order, coeffs })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// Rational value if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    /// Image under `ζ_L ↦ ζ_{L'}^{L'/L}`.
    pub fn embed(&self, target: u32) -> Result<Self, ScalarError> {
        if target == 0 {
            return Err(ScalarError::ZeroOrder);
        }
        if !target.is_multiple_of(self.order) {
            return Err(ScalarError::NotAMultiple {
                source_order: self.order as u64,
                target: target as u64,
            });
        }
        if target == self.order {
            return Ok(self.clone());
        }
        let step = (target / self.order) as i64;
        let c = ctx(target);
        let mut out = vec![BigRational::zero(); c.degree];
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let p = &c.power[((j as i64 * step) % target as i64) as usize];
            for (o, &v) in out.iter_mut().zip(p) {
                if v != 0 {
                    *o += a * rat(v);
                }
            }
        }
        Ok(CyclotomicScalar { order: target, coeffs: out })
    }

    fn promote(a: &Self, b: &Self) -> (Self, Self) {
        let l = a.order.lcm(&b.order);
        (a.embed(l).unwrap(), b.embed(l).unwrap())
    }

    /// Complex conjugation `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> Self {
        let c = ctx(self.order);
        let mut out = vec![BigRational::zero(); c.degree];
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let p = &c.power[(c.order as usize - j) % c.order as usize];
            for (o, &v) in out.iter_mut().zip(p) {
                if v != 0 {
                    *o += a * rat(v);
                }
            }
        }
        CyclotomicScalar { order: self.order, coeffs: out }
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    fn mul_same(&self, other: &Self) -> Self {
        let c = ctx(self.order);
        let d = c.degree;
        if d == 1 {
            return CyclotomicScalar { order: self.order, coeffs: vec![&self.coeffs[0] * &other.coeffs[0]] };
        }
        let mut prod = vec![BigRational::zero(); 2 * d - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let mut out: Vec<BigRational> = prod[..d].to_vec();
        for (k, v) in prod.iter().enumerate().skip(d) {
            if v.is_zero() {
                continue;
            }
            let p = &c.power[k % c.order as usize];
            for (o, &w) in out.iter_mut().zip(p) {
                if w != 0 {
                    *o += v * rat(w);
                }
            }
        }
        CyclotomicScalar { order: self.order, coeffs: out }
    }

    /// Multiply by `ζ_L^k` where `L` is this scalar's order.
    pub fn mul_root(&self, k: i64) -> Self {
        if k.rem_euclid(self.order as i64) == 0 {
            return self.clone();
        }
        self.mul_same(&Self::root(self.order, k))
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let c = ctx(self.order);
        let d = c.degree;
        if d == 1 {
            return Ok(CyclotomicScalar { order: self.order, coeffs: vec![self.coeffs[0].recip()] });
        }
        // columns: coordinates of self * x^j
        let mut m: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); d + 1]; d];
        for j in 0..d {
            let col = self.mul_same(&Self::root(self.order, j as i64));
            for i in 0..d {
                m[i][j] = col.coeffs[i].clone();
            }
        }
        m[0][d] = BigRational::one();
        // Gauss-Jordan over Q; the multiplication matrix of a nonzero field element is invertible.
        for col in 0..d {
            let piv = (col..d).find(|&r| !m[r][col].is_zero()).ok_or(ScalarError::DivisionByZero)?;
            m.swap(col, piv);
            let inv = m[col][col].recip();
            for v in m[col].iter_mut() {
                *v *= &inv;
            }
            for r in 0..d {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    for k in col..=d {
                        let t = &m[col][k] * &f;
                        m[r][k] -= t;
                    }
                }
            }
        }
        Ok(CyclotomicScalar { order: self.order, coeffs: m.into_iter().map(|r| r[d].clone()).collect() })
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// If this scalar equals `ζ_L^k` for some `k`, return it as a root of unity.
    pub fn to_root_of_unity(&self) -> Option<RootOfUnity> {
        // cheap filter: a root of unity has exactly one nonzero coordinate iff it
        // is a basis power; otherwise compare against all powers.
        let l = self.order as i64;
        if let Some(k) = (0..l).find(|&k| *self == Self::root(self.order, k)) {
            return Some(RootOfUnity::new(l as u64, k));
        }
        // for odd L the field also contains -ζ_L^k = ζ_{2L}^{L+2k}
        if l % 2 == 1 {
            let neg = -self;
            return (0..l).find(|&k| neg == Self::root(self.order, k)).map(|k| RootOfUnity::new(2 * l as u64, l + 2 * k));
        }
        None
    }

    /// Parse `"q(a/b, c/d, ...)"`, `"zeta(L)^k"`, `"zeta(L)"`, or a plain rational,
    /// embedding the result at `order`.
    pub fn parse(s: &str, order: u32) -> Result<Self, ScalarError> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let err = || ScalarError::Parse(s.to_string());
        if let Some(body) = t.strip_prefix("q(").and_then(|r| r.strip_suffix(')')) {
            let coeffs = body
                .split(',')
                .map(parse_rational)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(err)?;
            return Self::from_coeffs(order, coeffs);
        }
        let (neg, t) = match t.strip_prefix('-') {
            Some(r) => (true, r.to_string()),
            None => (false, t.clone()),
        };
        if let Some(rest) = t.strip_prefix("zeta(") {
            let close = rest.find(')').ok_or_else(err)?;
            let l: u32 = rest[..close].parse().map_err(|_| err())?;
            let tail = &rest[close + 1..];
            let k: i64 = if tail.is_empty() {
                1
            } else {
                tail.strip_prefix('^').ok_or_else(err)?.parse().map_err(|_| err())?
            };
            if l == 0 {
                return Err(ScalarError::ZeroOrder);
            }
            let v = Self::root(l, k).embed(order)?;
            return Ok(if neg { -v } else { v });
        }
        let q = parse_rational(&t).ok_or_else(err)?;
        let v = Self::from_rational(order, q);
        Ok(if neg { -v } else { v })
    }

    /// Canonical `q(...)` form.
    pub fn to_q_string(&self) -> String {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("q({})", parts.join(","))
    }

    /// Rational approximation of `(re, im)` under `ζ_L ↦ exp(2πi/L)`; for display only.
    pub fn approx(&self) -> (f64, f64) {
        let l = self.order as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            let v = c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN);
            let a = std::f64::consts::TAU * j as f64 / l;
            re += v * a.cos();
            im += v * a.sin();
        }
        (re, im)
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        Some(BigRational::from_integer(s.parse().ok()?))
    }
}

impl PartialEq for CyclotomicScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            self.coeffs == other.coeffs
        } else {
            let (a, b) = Self::promote(self, other);
            a.coeffs == b.coeffs
        }
    }
}
impl Eq for CyclotomicScalar {}

impl fmt::Display for CyclotomicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            let body = match (j, mag.is_one()) {
                (0, _) => mag.to_string(),
                (1, true) => format!("z{}", self.order),
                (1, false) => format!("{mag}*z{}", self.order),
                (_, true) => format!("z{}^{j}", self.order),
                (_, false) => format!("{mag}*z{}^{j}", self.order),
            };
            terms.push((sign, body));
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (sign, body)) in terms.iter().enumerate() {
            match (i, *sign) {
                (0, "+") => write!(f, "{body}")?,
                (0, _) => write!(f, "-{body}")?,
                _ => write!(f, " {sign} {body}")?,
            }
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> $tr<&'a CyclotomicScalar> for &'a CyclotomicScalar {
            type Output = CyclotomicScalar;
            fn $m(self, rhs: &'a CyclotomicScalar) -> CyclotomicScalar {
                let f: fn(&CyclotomicScalar, &CyclotomicScalar) -> CyclotomicScalar = $body;
                if self.order == rhs.order {
                    f(self, rhs)
                } else {
                    let (a, b) = CyclotomicScalar::promote(self, rhs);
                    f(&a, &b)
                }
            }
        }
        impl $tr<CyclotomicScalar> for CyclotomicScalar {
            type Output = CyclotomicScalar;
            fn $m(self, rhs: CyclotomicScalar) -> CyclotomicScalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a CyclotomicScalar> for CyclotomicScalar {
            type Output = CyclotomicScalar;
            fn $m(self, rhs: &'a CyclotomicScalar) -> CyclotomicScalar {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| CyclotomicScalar {
    order: a.order,
    coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
});
binop!(Sub, sub, |a, b| CyclotomicScalar {
    order: a.order,
    coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
});
binop!(Mul, mul, |a, b| a.mul_same(b));

impl AddAssign<&CyclotomicScalar> for CyclotomicScalar {
    fn add_assign(&mut self, rhs: &CyclotomicScalar) {
        if self.order == rhs.order {
            for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                if !y.is_zero() {
                    *x += y;
                }
            }
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&CyclotomicScalar> for CyclotomicScalar {
    fn sub_assign(&mut self, rhs: &CyclotomicScalar) {
        if self.order == rhs.order {
            for (x, y) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                if !y.is_zero() {
                    *x -= y;
                }
            }
        } else {
            *self = &*self - rhs;
        }
    }
}

impl MulAssign<&CyclotomicScalar> for CyclotomicScalar {
    fn mul_assign(&mut self, rhs: &CyclotomicScalar) {
        *self = &*self * rhs;
    }
}

impl Neg for CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn neg(self) -> CyclotomicScalar {
        CyclotomicScalar { order: self.order, coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl Neg for &CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn neg(self) -> CyclotomicScalar {
        -(self.clone())
    }
}

/// `ζ_N^e`, kept symbolically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RootOfUnity {
    order: u64,
    exponent: u64,
}

impl RootOfUnity {
    pub fn new(order: u64, exponent: i64) -> Self {
        assert!(order > 0, "root of unity of order 0");
        RootOfUnity { order, exponent: exponent.rem_euclid(order as i64) as u64 }
    }

    pub fn one() -> Self {
        RootOfUnity { order: 1, exponent: 0 }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_one(&self) -> bool {
        self.exponent == 0
    }

    /// Exponent after rewriting as a power of `ζ_target`.
    pub fn exponent_at(&self, target: u64) -> Result<u64, ScalarError> {
        let r = self.reduced();
        if !target.is_multiple_of(r.order) {
            return Err(ScalarError::NotAMultiple { source_order: r.order, target });
        }
        Ok(r.exponent * (target / r.order))
    }

    /// Same root written with its exact multiplicative order.
    pub fn reduced(&self) -> Self {
        let g = self.order.gcd(&self.exponent);
        if self.exponent == 0 {
            return RootOfUnity::one();
        }
        RootOfUnity { order: self.order / g, exponent: self.exponent / g }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let l = self.order.lcm(&other.order);
        let e = self.exponent * (l / self.order) + other.exponent * (l / other.order);
        RootOfUnity::new(l, (e % l) as i64)
    }

    pub fn inv(&self) -> Self {
        RootOfUnity::new(self.order, -(self.exponent as i64))
    }

    pub fn pow(&self, k: i64) -> Self {
        let e = (self.exponent as i128 * k as i128).rem_euclid(self.order as i128);
        RootOfUnity::new(self.order, e as i64)
    }

    pub fn to_scalar(&self, order: u32) -> Result<CyclotomicScalar, ScalarError> {
        let e = self.exponent_at(order as u64)?;
        Ok(CyclotomicScalar::root(order, e as i64))
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "zeta({})^{}", self.order, self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        for n in 1..40u32 {
            assert_eq!(cyclotomic_polynomial(n).len() as u64 - 1, euler_phi(n as u64));
        }
    }

    #[test]
    fn i_squared() {
        let i = CyclotomicScalar::root(4, 1);
        assert_eq!(&i * &i, CyclotomicScalar::from_int(4, -1));
        assert_eq!(&i * &i, CyclotomicScalar::root(4, 2));
    }

    #[test]
    fn conj_of_zeta3() {
        assert_eq!(CyclotomicScalar::root(3, 1).conj(), CyclotomicScalar::root(3, 2));
    }

    #[test]
    fn inverse_of_one_plus_zeta5() {
        let a = CyclotomicScalar::one(5) + CyclotomicScalar::root(5, 1);
        let b = a.inv().unwrap();
        assert!((&a * &b).is_one());
        // multiply out by hand in the power basis: (1+z)^{-1} = -z - z^3 (since z^5 = 1 and
        // (1+z)(-z-z^3) = -z - z^2 - z^3 - z^4 = 1)
        let hand = -(CyclotomicScalar::root(5, 1) + CyclotomicScalar::root(5, 3));
        assert_eq!(b, hand);
        assert_eq!(CyclotomicScalar::zero(5).inv(), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn embeddings() {
        assert_eq!(CyclotomicScalar::root(2, 1).embed(4).unwrap(), CyclotomicScalar::root(4, 2));
        let half = CyclotomicScalar::from_rational(1, BigRational::new(3.into(), 2.into()));
        assert_eq!(
            half.embed(7).unwrap().as_rational().cloned(),
            Some(BigRational::new(3.into(), 2.into()))
        );
        assert_eq!(CyclotomicScalar::root(3, 1).embed(12).unwrap(), CyclotomicScalar::root(12, 4));
        assert!(matches!(
            CyclotomicScalar::root(3, 1).embed(8),
            Err(ScalarError::NotAMultiple { .. })
        ));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(CyclotomicScalar::parse("zeta(4)^3", 4).unwrap(), CyclotomicScalar::root(4, 3));
        assert_eq!(CyclotomicScalar::parse("zeta(2)", 4).unwrap(), CyclotomicScalar::from_int(4, -1));
        assert_eq!(
            CyclotomicScalar::parse("q(1/2, -1)", 4).unwrap().to_q_string(),
            "q(1/2,-1)"
        );
        assert!(CyclotomicScalar::parse("q(1,2,3)", 4).is_err());
        assert!(CyclotomicScalar::parse("bogus", 4).is_err());
    }

    #[test]
    fn roots_of_unity_group() {
        let a = RootOfUnity::new(4, 1);
        let b = RootOfUnity::new(6, 1);
        let c = a.mul(&b);
        assert_eq!(c.order(), 12);
        assert_eq!(c.exponent(), 5);
        assert!(a.mul(&a.inv()).is_one());
        for n in 1..13u32 {
            for k in 0..n as i64 {
                let z = RootOfUnity::new(n as u64, k).to_scalar(n).unwrap();
                assert!((&z * &z.conj()).is_one());
                assert_eq!(z.to_root_of_unity().unwrap().exponent(), k as u64);
            }
        }
    }
}
