//! Polynomials over a prime field 𝔽_p, factorization, prime enumeration and
//! the arithmetic functions Λ and Λ₀.
//!
//! Logarithmic quantities are exact rationals measured in units of `log q`.

mod arith;
mod factor;
mod parse;
mod sieve;

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Rational;

pub use factor::{factor, factor_with_rng, is_irreducible, Factorization};
pub use parse::parse_poly;
pub use sieve::{count_irreducibles, list_irreducibles, necklace_count};

/// The prime field 𝔽_p. Only prime fields are supported, so `q == p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    p: u32,
}

impl Field {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p >= 1 << 31 || !crate::numeric::is_prime(p) {
            return Err(Error::InvalidField(p));
        }
        Ok(Field { p: p as u32 })
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn q(self) -> u64 {
        self.p as u64
    }

    #[inline]
    pub fn reduce(self, c: i64) -> u32 {
        c.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.p as u64 - b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn pow(self, mut a: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero element.
    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(a % self.p != 0);
        self.pow(a, self.p as u64 - 2)
    }

    /// `q^n`, or `None` on overflow.
    pub fn norm_of_degree(self, n: usize) -> Option<u64> {
        (self.p as u64).checked_pow(u32::try_from(n).ok()?)
    }

    /// A generator of 𝔽_p^*.
    pub fn primitive_root(self) -> u32 {
        let order = self.p as u64 - 1;
        let primes = crate::numeric::prime_divisors(order);
        (2..self.p)
            .find(|&g| primes.iter().all(|&r| self.pow(g, order / r) != 1))
            .unwrap_or(1)
    }

    pub fn zero(self) -> Poly {
        Poly::zero(self)
    }

    pub fn one(self) -> Poly {
        Poly::one(self)
    }

    pub fn t(self) -> Poly {
        Poly::t(self)
    }

    pub fn constant(self, c: i64) -> Poly {
        Poly::from_signed(self, &[c])
    }

    pub fn parse(self, text: &str) -> Result<Poly> {
        parse_poly(text, self)
    }
}

/// A polynomial over 𝔽_p with little-endian coefficients and no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: Field,
    coeffs: Vec<u32>,
}

impl Poly {
    /// Builds a polynomial from little-endian coefficients, reducing mod p.
    pub fn new(field: Field, mut coeffs: Vec<u32>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= field.p;
        }
        let mut f = Poly { field, coeffs };
        f.trim();
        f
    }

    pub fn from_signed(field: Field, coeffs: &[i64]) -> Self {
        Poly::new(field, coeffs.iter().map(|&c| field.reduce(c)).collect())
    }

    pub(crate) fn from_raw(field: Field, coeffs: Vec<u32>) -> Self {
        let mut f = Poly { field, coeffs };
        f.trim();
        f
    }

    pub fn zero(field: Field) -> Self {
        Poly { field, coeffs: Vec::new() }
    }

    pub fn one(field: Field) -> Self {
        Poly { field, coeffs: vec![1] }
    }

    /// The indeterminate `T`.
    pub fn t(field: Field) -> Self {
        Poly { field, coeffs: vec![0, 1] }
    }

    pub fn constant(field: Field, c: u32) -> Self {
        Poly::new(field, vec![c])
    }

    /// `c·T^k`.
    pub fn monomial(field: Field, c: u32, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c;
        Poly::new(field, coeffs)
    }

    /// Decodes the base-p digits of `index` as coefficients (low digit first).
    pub fn from_index(field: Field, mut index: u64) -> Self {
        let p = field.p as u64;
        let mut coeffs = Vec::new();
        while index > 0 {
            coeffs.push((index % p) as u32);
            index /= p;
        }
        Poly::from_raw(field, coeffs)
    }

    /// Inverse of [`Poly::from_index`].
    pub fn index(&self) -> u64 {
        let p = self.field.p as u64;
        self.coeffs.iter().rev().fold(0u64, |acc, &c| acc * p + c as u64)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Degree, `None` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with `deg 0 = 0`; use only where the zero case cannot occur or does not matter.
    #[inline]
    pub fn deg(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    /// Splits off the leading coefficient: `self = unit · monic`.
    pub fn to_monic(&self) -> (u32, Poly) {
        let lc = self.leading();
        if lc == 0 || lc == 1 {
            return (lc, self.clone());
        }
        (lc, self.scale(self.field.inv(lc)))
    }

    pub fn monic(&self) -> Poly {
        self.to_monic().1
    }

    /// The norm `|f| = q^{deg f}`, with `|0| = 0`. `None` on overflow.
    pub fn norm(&self) -> Option<u64> {
        match self.degree() {
            None => Some(0),
            Some(d) => self.field.norm_of_degree(d),
        }
    }

    pub fn scale(&self, c: u32) -> Poly {
        let f = self.field;
        Poly::from_raw(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn eval(&self, x: u32) -> u32 {
        let f = self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn derivative(&self) -> Poly {
        let f = self.field;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| f.mul(c, (i as u64 % f.p as u64) as u32))
            .collect();
        Poly::from_raw(f, coeffs)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.field, other.field);
        Poly::from_raw(self.field, arith::add(self.field.p, &self.coeffs, &other.coeffs))
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.field, other.field);
        Poly::from_raw(self.field, arith::sub(self.field.p, &self.coeffs, &other.coeffs))
    }

    pub fn neg(&self) -> Poly {
        let f = self.field;
        Poly::from_raw(f, self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.field, other.field);
        Poly::from_raw(self.field, arith::mul(self.field.p, &self.coeffs, &other.coeffs))
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Euclidean division: `self = q·d + r` with `deg r < deg d`.
    pub fn divrem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        if self.field != d.field {
            return Err(Error::FieldMismatch);
        }
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (q, r) = arith::divrem(self.field.p, &self.coeffs, &d.coeffs);
        Ok((Poly::from_raw(self.field, q), Poly::from_raw(self.field, r)))
    }

    pub fn rem(&self, d: &Poly) -> Result<Poly> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut r = self.coeffs.clone();
        arith::rem_in_place(self.field.p, &mut r, &d.coeffs);
        Ok(Poly::from_raw(self.field, r))
    }

    /// Quotient when `d` divides `self` exactly, otherwise `None`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.divrem(d).ok()?;
        r.is_zero().then_some(q)
    }

    pub fn divides(&self, other: &Poly) -> bool {
        !self.is_zero() && other.rem(self).map(|r| r.is_zero()).unwrap_or(false)
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Returns `(g, s, t)` with `s·self + t·other = g`, `g` monic.
    pub fn ext_gcd(&self, other: &Poly) -> (Poly, Poly, Poly) {
        let field = self.field;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(field), Poly::zero(field));
        let (mut t0, mut t1) = (Poly::zero(field), Poly::one(field));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1).expect("nonzero divisor");
            r0 = std::mem::replace(&mut r1, r);
            let s = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        let lc = r0.leading();
        if lc > 1 {
            let inv = field.inv(lc);
            (r0.scale(inv), s0.scale(inv), t0.scale(inv))
        } else {
            (r0, s0, t0)
        }
    }

    /// Inverse modulo `m`, if it exists.
    pub fn inv_mod(&self, m: &Poly) -> Option<Poly> {
        let (g, s, _) = self.rem(m).ok()?.ext_gcd(m);
        g.is_one().then(|| s.rem(m).expect("nonzero modulus"))
    }

    pub fn mulmod(&self, other: &Poly, m: &Poly) -> Result<Poly> {
        self.mul(other).rem(m)
    }

    /// `self^e mod m`.
    pub fn powmod(&self, e: u128, m: &Poly) -> Result<Poly> {
        let mut acc = Poly::one(self.field).rem(m)?;
        let mut base = self.rem(m)?;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mulmod(&base, m)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mulmod(&base, m)?;
            }
        }
        Ok(acc)
    }

    /// Λ(f) in units of log q: `deg P` when `f = P^t` is a monic prime power, else 0.
    pub fn von_mangoldt(&self) -> u32 {
        if self.degree().is_none_or(|d| d == 0) || !self.is_monic() {
            return 0;
        }
        match factor(self) {
            Ok(fac) if fac.factors.len() == 1 => fac.factors[0].0.deg() as u32,
            _ => 0,
        }
    }

    /// Λ₀(f) = Λ(f)/|f| in units of log q (zero unless `f` is a monic prime power).
    pub fn lambda0(&self) -> Rational {
        let lam = self.von_mangoldt();
        if lam == 0 {
            return Rational::zero();
        }
        let norm = BigInt::from(self.field.q()).pow(self.deg() as u32);
        Rational::new(BigInt::from(lam), norm)
    }
}

/// Λ(f) in log-q units as an exact rational.
pub fn von_mangoldt(f: &Poly) -> Rational {
    Rational::from_integer(BigInt::from(f.von_mangoldt()))
}

/// Λ₀(f) = Λ(f)/|f| in log-q units.
pub fn lambda0(f: &Poly) -> Rational {
    f.lambda0()
}

/// Σ_{deg f ≤ N, f monic} Λ(f)/|f| in log-q units, summed over prime powers by degree.
pub fn mertens_sum(field: Field, bound: usize) -> Rational {
    let q = BigInt::from(field.q());
    let mut total = Rational::zero();
    for k in 1..=bound {
        // Each prime P of degree d | k contributes P^{k/d} with weight d/q^k.
        let mut numer = BigInt::zero();
        for d in crate::numeric::divisors(k as u64) {
            numer += BigInt::from(d) * BigInt::from(necklace_count(field.q(), d as usize));
        }
        total += Rational::new(numer, q.pow(k as u32));
    }
    total
}

/// Σ_{P | m} deg P/(|P| − 1) in log-q units.
pub fn prime_factor_sum(m: &Poly) -> Result<Rational> {
    let fac = factor(m)?;
    let q = BigInt::from(m.field().q());
    let mut total = Rational::zero();
    for (prime, _) in &fac.factors {
        let d = prime.deg() as u32;
        total += Rational::new(BigInt::from(d), q.pow(d) - BigInt::one());
    }
    Ok(total)
}

/// Iterator over the `q^n` monic polynomials of degree `n` in index order.
pub struct Monics {
    field: Field,
    n: usize,
    next: u64,
    end: u64,
}

impl Iterator for Monics {
    type Item = Poly;

    fn next(&mut self) -> Option<Poly> {
        if self.next >= self.end {
            return None;
        }
        // The constant term is the most significant digit, so the stream is sorted
        // little-endian lexicographically.
        let p = self.field.p as u64;
        let mut k = self.next;
        self.next += 1;
        let mut coeffs = vec![0u32; self.n + 1];
        for c in coeffs[..self.n].iter_mut().rev() {
            *c = (k % p) as u32;
            k /= p;
        }
        coeffs[self.n] = 1;
        Some(Poly { field: self.field, coeffs })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Monics {}

/// All monic polynomials of degree `n`, in increasing [`Ord`] order.
pub fn enumerate_monics(field: Field, n: usize) -> Monics {
    let end = field.norm_of_degree(n).expect("q^n overflows u64");
    Monics { field, n, next: 0, end }
}

impl Ord for Poly {
    /// Degree first (zero polynomial smallest), then little-endian lexicographic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.cmp(&other.coeffs))
            .then_with(|| self.field.p.cmp(&other.field.p))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Poly {
    /// Canonical form: descending powers, e.g. `2*T^3+T+1`.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(out, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(out, "+")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(out, "{c}")?,
                (1, 1) => write!(out, "T")?,
                (1, c) => write!(out, "{c}*T")?,
                (k, 1) => write!(out, "T^{k}")?,
                (k, c) => write!(out, "{c}*T^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{self}")
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl std::ops::$tr<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                Poly::$method(self, rhs)
            }
        }
        impl std::ops::$tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                Poly::$method(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Field {
        Field::new(3).unwrap()
    }

    fn p(s: &str) -> Poly {
        parse_poly(s, f3()).unwrap()
    }

    #[test]
    fn field_rejects_non_primes() {
        assert!(Field::new(2).is_err());
        assert!(Field::new(9).is_err());
        assert!(Field::new(1).is_err());
        assert_eq!(Field::new(7).unwrap().q(), 7);
    }

    #[test]
    fn product_of_linear_factors() {
        assert_eq!(&p("T+1") * &p("T+2"), p("T^2+2"));
    }

    #[test]
    fn gcd_against_square() {
        assert_eq!(p("T^2+T+1").gcd(&p("T+2")), p("T+2"));
        assert_eq!(p("2*T+1").gcd(&Poly::zero(f3())), p("T+2"));
    }

    #[test]
    fn exact_division() {
        let (q, r) = p("T^2").divrem(&p("T")).unwrap();
        assert_eq!(q, p("T"));
        assert!(r.is_zero());
        assert_eq!(p("T").divrem(&Poly::zero(f3())), Err(Error::DivisionByZero));
    }

    #[test]
    fn ext_gcd_is_bezout() {
        let a = p("T^4+2*T+1");
        let b = p("T^3+T^2+2");
        let (g, s, t) = a.ext_gcd(&b);
        assert_eq!(&(&s * &a) + &(&t * &b), g);
    }

    #[test]
    fn inverse_mod() {
        let m = p("T^2+T+1");
        let inv = p("T+1").inv_mod(&m).unwrap();
        assert!(p("T+1").mulmod(&inv, &m).unwrap().is_one());
        assert!(p("T+2").inv_mod(&m).is_none());
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(p("2*T^3+T").to_string(), "2*T^3+T");
        assert_eq!(p("T^2+T+1").to_string(), "T^2+T+1");
        assert_eq!(p("-1").to_string(), "2");
        assert_eq!(Poly::zero(f3()).to_string(), "0");
        assert_eq!(p("5*T").to_string(), "2*T");
    }

    #[test]
    fn index_round_trip() {
        for i in 0..243 {
            assert_eq!(Poly::from_index(f3(), i).index(), i);
        }
    }

    #[test]
    fn monic_enumeration() {
        let ones: Vec<String> = enumerate_monics(f3(), 1).map(|f| f.to_string()).collect();
        assert_eq!(ones, ["T", "T+1", "T+2"]);
        assert_eq!(enumerate_monics(f3(), 0).collect::<Vec<_>>(), vec![Poly::one(f3())]);
        assert_eq!(enumerate_monics(f3(), 2).count(), 9);
    }

    #[test]
    fn von_mangoldt_values() {
        assert_eq!(p("T^2").von_mangoldt(), 1);
        assert_eq!(p("T^2+T").von_mangoldt(), 0);
        assert_eq!(p("T^2+1").von_mangoldt(), 2);
        assert_eq!(p("1").von_mangoldt(), 0);
    }

    #[test]
    fn lambda0_values() {
        assert_eq!(p("T").lambda0(), Rational::new(1.into(), 3.into()));
        assert_eq!(p("T^2").lambda0(), Rational::new(1.into(), 9.into()));
        assert!(p("T^2+T").lambda0().is_zero());
    }

    #[test]
    fn mertens_small() {
        assert_eq!(mertens_sum(f3(), 1), Rational::from_integer(1.into()));
        assert_eq!(mertens_sum(f3(), 2), Rational::from_integer(2.into()));
    }

    #[test]
    fn prime_factor_sums() {
        let r = |a: i64, b: i64| Rational::new(a.into(), b.into());
        assert_eq!(prime_factor_sum(&p("T^3+2*T")).unwrap(), r(3, 2));
        assert_eq!(prime_factor_sum(&p("T^2+T+1")).unwrap(), r(1, 2));
        assert_eq!(prime_factor_sum(&p("T^2+1")).unwrap(), r(1, 4));
    }

    #[test]
    fn ordering_is_degree_then_little_endian() {
        let mut v = vec![p("T^2"), p("T+2"), p("2*T"), p("T"), p("1")];
        v.sort();
        let s: Vec<String> = v.iter().map(|f| f.to_string()).collect();
        assert_eq!(s, ["1", "T", "2*T", "T+2", "T^2"]);
    }
}
