//! Certified real enclosures of cyclotomic numbers.
//!
//! Positivity questions about exact scalars are answered by enclosing the value in
//! a rational interval and refining until the interval avoids zero. Zero itself is
//! detected exactly beforehand, so refinement always terminates.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalars::CyclotomicScalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

fn floor_dyadic(x: &BigRational, bits: u32) -> BigRational {
    let s = x * BigRational::from_integer(pow2(bits));
    BigRational::new(s.floor().to_integer(), pow2(bits))
}

fn ceil_dyadic(x: &BigRational, bits: u32) -> BigRational {
    let s = x * BigRational::from_integer(pow2(bits));
    BigRational::new(s.ceil().to_integer(), pow2(bits))
}

impl Interval {
    pub fn point(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn around(center: BigRational, radius: BigRational) -> Self {
        Interval { lo: &center - &radius, hi: center + radius }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// Outward rounding to dyadic endpoints with `bits` fractional bits.
    pub fn round(&self, bits: u32) -> Self {
        Interval { lo: floor_dyadic(&self.lo, bits), hi: ceil_dyadic(&self.hi, bits) }
    }

    pub fn add(&self, o: &Self) -> Self {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_negative() {
            Interval { lo: &self.hi * q, hi: &self.lo * q }
        } else {
            Interval { lo: &self.lo * q, hi: &self.hi * q }
        }
    }

    /// `Some(ordering against 0)` if the interval certifies a sign.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

/// Partial sum of `atan(1/k)` with an error bound below `2^-bits`.
fn atan_inv(k: u64, bits: u32) -> Interval {
    let k2 = BigInt::from(k) * BigInt::from(k);
    let tol = BigRational::new(BigInt::one(), pow2(bits + 2));
    let mut sum = BigRational::zero();
    let mut kpow = BigInt::from(k);
    let mut n: u64 = 0;
    loop {
        let term = BigRational::new(BigInt::one(), BigInt::from(2 * n + 1) * &kpow);
        if term < tol {
            // alternating series with decreasing terms: error bounded by this term
            return Interval::around(sum, term);
        }
        if n.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        kpow *= &k2;
        n += 1;
    }
}

/// Enclosure of π of width about `2^-bits`.
pub fn pi(bits: u32) -> Interval {
    let a = atan_inv(5, bits + 6).scale(&BigRational::from_integer(16.into()));
    let b = atan_inv(239, bits + 6).scale(&BigRational::from_integer(4.into()));
    a.sub(&b).round(bits + 2)
}

/// Enclosures of `cos x` and `sin x` for a rational `x` with `|x| <= 8`.
fn cos_sin_rational(x: &BigRational, bits: u32) -> (Interval, Interval) {
    let tol = BigRational::new(BigInt::one(), pow2(bits + 2));
    let mut cos = BigRational::zero();
    let mut sin = BigRational::zero();
    let mut term = BigRational::one(); // x^n / n!
    let mut n: u64 = 0;
    loop {
        match n % 4 {
            0 => cos += &term,
            1 => sin += &term,
            2 => cos -= &term,
            _ => sin -= &term,
        }
        n += 1;
        term = term * x / BigRational::from_integer(BigInt::from(n));
        // Lagrange remainder: |R_n| <= |x|^n / n! once n exceeds |x|
        let bound = term.abs();
        if BigRational::from_integer(BigInt::from(n)) > x.abs() && bound < tol {
            let c = Interval::around(cos, bound.clone()).round(bits + 2);
            let s = Interval::around(sin, bound).round(bits + 2);
            return (c, s);
        }
    }
}

thread_local! {
    static TRIG: RefCell<HashMap<(u32, u32), Vec<(Interval, Interval)>>> = RefCell::new(HashMap::new());
}

/// Enclosures of `(cos, sin)(2πj/L)` for `0 <= j < L`.
fn trig_table(order: u32, bits: u32) -> Vec<(Interval, Interval)> {
    if let Some(t) = TRIG.with(|t| t.borrow().get(&(order, bits)).cloned()) {
        return t;
    }
    let p = pi(bits + 8);
    let mut out = Vec::with_capacity(order as usize);
    for j in 0..order {
        // reduce to angle in [-π, π] so the Taylor series converges quickly
        let (jj, flip) = if 2 * j > order { (order - j, true) } else { (j, false) };
        let frac = BigRational::new(BigInt::from(2 * jj), BigInt::from(order));
        let ang = p.scale(&frac);
        let mid = floor_dyadic(&((&ang.lo + &ang.hi) / BigRational::from_integer(2.into())), bits + 8);
        let rad = ang.width();
        let (c, s) = cos_sin_rational(&mid, bits + 4);
        // both functions are 1-Lipschitz
        let c = Interval { lo: &c.lo - &rad, hi: &c.hi + &rad }.round(bits + 2);
        let s = Interval { lo: &s.lo - &rad, hi: &s.hi + &rad }.round(bits + 2);
        let s = if flip { Interval { lo: -s.hi, hi: -s.lo } } else { s };
        out.push((c, s));
    }
    TRIG.with(|t| t.borrow_mut().insert((order, bits), out.clone()));
    out
}

/// Enclosures of the real and imaginary parts of `x` under `ζ_L ↦ exp(2πi/L)`.
pub fn enclose(x: &CyclotomicScalar, bits: u32) -> (Interval, Interval) {
    let table = trig_table(x.order(), bits);
    let mut re = Interval::point(BigRational::zero());
    let mut im = Interval::point(BigRational::zero());
    for (j, c) in x.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        re = re.add(&table[j].0.scale(c));
        im = im.add(&table[j].1.scale(c));
    }
    (re.round(bits), im.round(bits))
}

/// Certified sign of the real part of `x`.
pub fn sign_real_part(x: &CyclotomicScalar) -> Ordering {
    let re = (x + &x.conj()) * CyclotomicScalar::from_rational(x.order(), BigRational::new(1.into(), 2.into()));
    if re.is_zero() {
        return Ordering::Equal;
    }
    if let Some(q) = re.as_rational() {
        return q.cmp(&BigRational::zero());
    }
    let mut bits = 64;
    loop {
        let scale = re
            .coeffs()
            .iter()
            .map(|c| c.numer().abs().bits() + c.denom().bits())
            .max()
            .unwrap_or(0) as u32;
        let (iv, _) = enclose(&re, bits + scale);
        if let Some(s) = iv.sign() {
            return s;
        }
        bits *= 2;
        assert!(bits < 1 << 20, "sign refinement did not converge");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f64_of(q: &BigRational) -> f64 {
        use num_traits::ToPrimitive;
        q.to_f64().unwrap()
    }

    #[test]
    fn pi_encloses_float_pi() {
        let p = pi(100);
        assert!(f64_of(&p.lo) <= std::f64::consts::PI && std::f64::consts::PI <= f64_of(&p.hi));
        assert!(p.width() < BigRational::new(1.into(), pow2(95)));
    }

    #[test]
    fn trig_matches_floats() {
        for l in [1u32, 2, 3, 5, 8, 12, 17] {
            let t = trig_table(l, 80);
            for (j, (c, s)) in t.iter().enumerate() {
                let a = std::f64::consts::TAU * j as f64 / l as f64;
                assert!((f64_of(&c.lo) - a.cos()).abs() < 1e-12);
                assert!((f64_of(&s.hi) - a.sin()).abs() < 1e-12);
                assert!(c.lo <= c.hi && s.lo <= s.hi);
            }
        }
    }

    #[test]
    fn signs() {
        // 2cos(2π/5) = (√5 - 1)/2 > 0, 2cos(4π/5) < 0
        let z = CyclotomicScalar::root(5, 1);
        assert_eq!(sign_real_part(&z), Ordering::Greater);
        let z2 = CyclotomicScalar::root(5, 2);
        assert_eq!(sign_real_part(&z2), Ordering::Less);
        // ζ_4 has real part exactly 0
        assert_eq!(sign_real_part(&CyclotomicScalar::root(4, 1)), Ordering::Equal);
        // 1 + ζ_3 + ζ_3^2 = 0
        let s = CyclotomicScalar::one(3) + CyclotomicScalar::root(3, 1) + CyclotomicScalar::root(3, 2);
        assert_eq!(sign_real_part(&s), Ordering::Equal);
    }
}
