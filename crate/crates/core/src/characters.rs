//! Dirichlet characters modulo `m`, with exact values, conductors and parity.
//!
//! A character is determined by its exponent vector `(e_1, …, e_k)`: on the unit with
//! exponent vector `(x_1, …, x_k)` it takes the value `exp(2πi Σ e_i x_i / d_i)`.
//! Values are kept as rational fractions of a full turn, so sums of character values
//! can be evaluated exactly through Galois orbits (Ramanujan sums).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffpoly::{Field, Poly};
use crate::numeric::{gcd, mobius};
use crate::unitgroup::{Modulus, ResidueClass};
use crate::Rational;

/// The root of unity `exp(2πi · num/den)`, with `num/den` reduced and `0 ≤ num < den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Angle {
    num: u64,
    den: u64,
}

impl Angle {
    pub const ONE: Angle = Angle { num: 0, den: 1 };

    pub fn new(num: i128, den: u64) -> Angle {
        assert!(den > 0);
        let n = num.rem_euclid(den as i128) as u64;
        let g = gcd(n, den).max(1);
        Angle { num: n / g, den: den / g }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    /// Multiplicative order of the root of unity.
    pub fn den(self) -> u64 {
        self.den
    }

    pub fn is_one(self) -> bool {
        self.num == 0
    }

    pub fn mul(self, other: Angle) -> Angle {
        let den = crate::numeric::lcm(self.den, other.den).expect("small denominators");
        let num = self.num as i128 * (den / self.den) as i128 + other.num as i128 * (den / other.den) as i128;
        Angle::new(num, den)
    }

    pub fn conj(self) -> Angle {
        Angle::new(-(self.num as i128), self.den)
    }

    pub fn pow(self, k: i64) -> Angle {
        Angle::new(self.num as i128 * k as i128, self.den)
    }

    pub fn to_complex(self) -> Complex64 {
        if self.num == 0 {
            return Complex64::new(1.0, 0.0);
        }
        // Exact values on the axes avoid spurious 1e-17 residues.
        match (self.num * 4) % self.den == 0 {
            true => match self.num * 4 / self.den {
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            },
            false => Complex64::from_polar(1.0, std::f64::consts::TAU * self.num as f64 / self.den as f64),
        }
    }

    /// Closed form `a+b√3 i`-style text when the order divides 12, else `e(k/n)`.
    pub fn exact_string(self) -> String {
        if 12 % self.den != 0 {
            return format!("e({}/{})", self.num, self.den);
        }
        let k = self.num * (12 / self.den);
        const TABLE: [&str; 12] = [
            "1",
            "(√3+i)/2",
            "(1+√3i)/2",
            "i",
            "(-1+√3i)/2",
            "(-√3+i)/2",
            "-1",
            "(-√3-i)/2",
            "(-1-√3i)/2",
            "-i",
            "(1-√3i)/2",
            "(√3-i)/2",
        ];
        TABLE[k as usize].to_string()
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.exact_string())
    }
}

/// Ramanujan's sum `c_n(t) = Σ_{k ∈ (ℤ/n)*} exp(2πi kt/n)`, an integer.
pub fn ramanujan_sum(n: u64, t: u64) -> i64 {
    let g = gcd(n, t % n);
    let quotient = n / g;
    mobius(quotient) as i64 * (totient_u64(n) / totient_u64(quotient)) as i64
}

fn totient_u64(n: u64) -> u64 {
    crate::numeric::factor_u64(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

#[derive(Clone, Debug, Serialize)]
pub struct Character {
    pub index: usize,
    pub exponents: Vec<u64>,
    pub order: u64,
    pub conductor: Poly,
    pub conductor_degree: usize,
    /// Trivial on the constants 𝔽_q*.
    pub even: bool,
}

impl Character {
    pub fn is_principal(&self) -> bool {
        self.index == 0
    }

    pub fn is_primitive(&self, m: &Poly) -> bool {
        &self.conductor == m
    }

    pub fn is_real(&self) -> bool {
        self.order <= 2
    }

    /// `χ*(−1)` under the structural parity convention: `+1` when even, `−1` when odd.
    pub fn parity_sign(&self) -> i32 {
        if self.even {
            1
        } else {
            -1
        }
    }
}

/// Generators of the filtration `U_c = {u ≡ 1 mod (m/P^e), u ≡ 1 mod P^c}` for each prime power.
#[derive(Clone, Debug)]
struct LocalFiltration {
    prime: Poly,
    exponent: u32,
    /// `levels[c]` generates `U_c`, for `c = 0..exponent`.
    levels: Vec<Vec<u32>>,
}

/// All characters modulo `m`, principal first, indexed by the flat encoding of their exponents.
#[derive(Clone, Debug)]
pub struct CharacterGroup {
    modulus: Arc<Modulus>,
    chars: Vec<Character>,
    exponent: u64,
    constant_generator: u32,
}

impl CharacterGroup {
    pub fn new(modulus: Arc<Modulus>) -> Result<Self> {
        let filtrations = local_filtrations(&modulus)?;
        let field = modulus.field();
        let exponent = modulus.exponent();
        let constant_generator = modulus.class(&Poly::constant(field, field.primitive_root()))?.flat();
        let mut group = CharacterGroup { modulus, chars: Vec::new(), exponent, constant_generator };
        let phi = group.modulus.phi() as usize;
        let mut chars = Vec::with_capacity(phi);
        for index in 0..phi {
            let exponents = group.modulus.exponents(index as u32);
            let order = group.character_order(&exponents);
            let mut conductor = Poly::one(field);
            for loc in &filtrations {
                let c = (0..loc.exponent)
                    .find(|&c| loc.levels[c as usize].iter().all(|&u| group.angle_raw(&exponents, u).is_one()))
                    .unwrap_or(loc.exponent);
                conductor = conductor.mul(&loc.prime.pow(c));
            }
            let even = group.angle_raw(&exponents, group.constant_generator).is_one();
            let conductor_degree = conductor.deg();
            chars.push(Character { index, exponents, order, conductor, conductor_degree, even });
        }
        group.chars = chars;
        Ok(group)
    }

    pub fn from_modulus(modulus: &Modulus) -> Result<Self> {
        Self::new(Arc::new(modulus.clone()))
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn modulus_arc(&self) -> &Arc<Modulus> {
        &self.modulus
    }

    pub fn field(&self) -> Field {
        self.modulus.field()
    }

    pub fn characters(&self) -> &[Character] {
        &self.chars
    }

    pub fn get(&self, index: usize) -> &Character {
        &self.chars[index]
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    /// Exponent `L` of the group: every value is an `L`-th root of unity.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    fn character_order(&self, exps: &[u64]) -> u64 {
        exps.iter()
            .zip(self.modulus.orders())
            .map(|(&e, &d)| d / gcd(e, d))
            .fold(1, |acc, o| crate::numeric::lcm(acc, o).expect("divides phi"))
    }

    fn angle_raw(&self, exps: &[u64], flat: u32) -> Angle {
        let l = self.exponent;
        let xs = self.modulus.exponents(flat);
        let mut num: u128 = 0;
        for ((&e, &x), &d) in exps.iter().zip(&xs).zip(self.modulus.orders()) {
            num = (num + (e as u128 * x as u128 % d as u128) * (l / d) as u128) % l as u128;
        }
        Angle::new(num as i128, l)
    }

    /// `χ(a)` for a unit given by its flat exponent.
    pub fn value_at_flat(&self, chi: &Character, flat: u32) -> Angle {
        self.angle_raw(&chi.exponents, flat)
    }

    pub fn value(&self, chi: &Character, a: &ResidueClass) -> Angle {
        self.value_at_flat(chi, a.flat())
    }

    /// `χ(f)`, or `None` when `gcd(f, m) ≠ 1` (the value 0).
    pub fn evaluate(&self, chi: &Character, f: &Poly) -> Option<Angle> {
        self.modulus.try_class(f).map(|a| self.value(chi, &a))
    }

    pub fn evaluate_complex(&self, chi: &Character, f: &Poly) -> Complex64 {
        self.evaluate(chi, f).map(Angle::to_complex).unwrap_or_default()
    }

    /// Index of `χ^k`.
    pub fn power_index(&self, chi: &Character, k: i64) -> usize {
        let exps: Vec<u64> = chi
            .exponents
            .iter()
            .zip(self.modulus.orders())
            .map(|(&e, &d)| (e as i128 * k as i128).rem_euclid(d as i128) as u64)
            .collect();
        self.modulus.flat_from_exponents(&exps) as usize
    }

    pub fn conjugate_index(&self, chi: &Character) -> usize {
        self.power_index(chi, -1)
    }

    /// The Galois orbits `{χ^k : gcd(k, ord χ) = 1}`, each listed from its smallest index.
    pub fn galois_orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.chars.len()];
        let mut orbits = Vec::new();
        for chi in &self.chars {
            if seen[chi.index] {
                continue;
            }
            let n = chi.order;
            let mut orbit = Vec::new();
            for k in 1..=n {
                if gcd(k, n) == 1 {
                    let j = self.power_index(chi, k as i64);
                    if !seen[j] {
                        seen[j] = true;
                        orbit.push(j);
                    }
                }
            }
            orbits.push(orbit);
        }
        orbits
    }

    /// Exact value of `Σ_χ w(χ)·χ(a)` for a weight constant on Galois orbits.
    ///
    /// Errors if the weight is not constant on some orbit.
    pub fn exact_weighted_sum<W>(&self, a: &ResidueClass, weight: W) -> Result<Rational>
    where
        W: Fn(&Character) -> Rational,
    {
        let mut total = Rational::zero();
        for orbit in self.galois_orbits() {
            let rep = &self.chars[orbit[0]];
            let w = weight(rep);
            if orbit.iter().any(|&j| weight(&self.chars[j]) != w) {
                return Err(Error::Internal(format!("weight not Galois-invariant on orbit of χ_{}", rep.index)));
            }
            let v = self.value(rep, a);
            let t = v.num() * (rep.order / v.den());
            total += w * Rational::from_integer(BigInt::from(ramanujan_sum(rep.order, t)));
        }
        Ok(total)
    }

    /// `χ*(P)` for a prime `P ∤ m(χ*)`: the value of `χ` on any unit congruent to `P` modulo the conductor.
    pub fn primitive_value(&self, chi: &Character, prime: &Poly) -> Result<Angle> {
        let f = &chi.conductor;
        if f.is_one() {
            return Ok(Angle::ONE);
        }
        if f.divides(prime) {
            return Err(Error::Precondition(format!("{prime} divides the conductor {f}")));
        }
        let field = self.field();
        let base = prime.rem(f)?;
        for t in 0..self.modulus.residue_count() as u64 {
            let u = base.add(&f.mul(&Poly::from_index(field, t)));
            if let Some(a) = self.modulus.try_class(&u) {
                return Ok(self.value(chi, &a));
            }
        }
        Err(Error::Internal(format!("no unit lift of {prime} modulo {f}")))
    }

    /// Both conductor-sum identities, evaluated as exact log-q rationals.
    pub fn conductor_sum_check(&self, a: Option<&ResidueClass>) -> Result<ConductorSumReport> {
        let m = self.modulus.poly();
        let phi = Rational::from_integer(BigInt::from(self.modulus.phi()));
        let degree_of = |chi: &Character| Rational::from_integer(BigInt::from(chi.conductor_degree));
        let (lhs, rhs) = match a {
            None => {
                let lhs = self.chars.iter().map(degree_of).fold(Rational::zero(), |acc, x| acc + x);
                let sum = crate::ffpoly::prime_factor_sum(m)?;
                let rhs = phi * (Rational::from_integer(BigInt::from(m.deg())) - sum);
                (lhs, rhs)
            }
            Some(a) => {
                if a.rep().is_one() {
                    return Err(Error::Precondition("a ≡ 1 mod m".into()));
                }
                let lhs = self.exact_weighted_sum(a, degree_of)?;
                let g = m.gcd(&a.rep().sub(&Poly::one(self.field())));
                let n = m.div_exact(&g).expect("gcd divides m");
                let lam = Rational::from_integer(BigInt::from(n.von_mangoldt()));
                let phi_n = Modulus::totient_of(&n)?;
                let rhs = -phi * lam / Rational::from_integer(BigInt::from(phi_n));
                (lhs, rhs)
            }
        };
        let equal = lhs == rhs;
        Ok(ConductorSumReport { lhs, rhs, equal })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConductorSumReport {
    pub lhs: Rational,
    pub rhs: Rational,
    pub equal: bool,
}

fn local_filtrations(modulus: &Modulus) -> Result<Vec<LocalFiltration>> {
    let m = modulus.poly();
    let field = modulus.field();
    let mut out = Vec::new();
    for (prime, e) in &modulus.factorization().factors {
        let pe = prime.pow(*e);
        let cofactor = m.div_exact(&pe).expect("prime power divides m");
        let cofactor_inv = if cofactor.is_one() { None } else { Some(cofactor.inv_mod(&pe).expect("coprime")) };
        // u ≡ x mod P^e and u ≡ 1 mod m/P^e
        let lift = |x: &Poly| -> Result<u32> {
            let u = match &cofactor_inv {
                None => x.rem(m)?,
                Some(inv) => {
                    let s = x.sub(&Poly::one(field)).mulmod(inv, &pe)?;
                    Poly::one(field).add(&cofactor.mul(&s)).rem(m)?
                }
            };
            Ok(modulus.class(&u)?.flat())
        };
        let d = prime.deg();
        let mut levels = vec![Vec::new(); *e as usize + 1];
        for c in (1..*e).rev() {
            let mut gens = levels[c as usize + 1].clone();
            for i in 0..d {
                let x = Poly::one(field).add(&Poly::monomial(field, 1, i).mul(&prime.pow(c)));
                gens.push(lift(&x)?);
            }
            levels[c as usize] = gens;
        }
        let mut base = if *e >= 2 { levels[1].clone() } else { Vec::new() };
        base.push(lift(&primitive_root_mod(prime)?)?);
        levels[0] = base;
        out.push(LocalFiltration { prime: prime.clone(), exponent: *e, levels });
    }
    Ok(out)
}

/// A generator of `(𝔽_q[T]/P)*` for an irreducible `P`.
fn primitive_root_mod(prime: &Poly) -> Result<Poly> {
    let field = prime.field();
    let order = field.norm_of_degree(prime.deg()).ok_or(Error::Overflow("|P|"))? - 1;
    let primes = crate::numeric::prime_divisors(order);
    let count = order + 1;
    for idx in 1..count {
        let g = Poly::from_index(field, idx);
        if primes.iter().all(|&r| !g.powmod((order / r) as u128, prime).map(|v| v.is_one()).unwrap_or(true)) {
            return Ok(g);
        }
    }
    Err(Error::Internal(format!("no primitive root modulo {prime}")))
}

impl Modulus {
    /// `φ(n)` for an arbitrary nonzero polynomial.
    pub fn totient_of(n: &Poly) -> Result<u64> {
        let fac = crate::ffpoly::factor(n)?;
        let field = n.field();
        let mut phi = 1u64;
        for (prime, e) in &fac.factors {
            let norm = field.norm_of_degree(prime.deg()).ok_or(Error::Overflow("totient"))?;
            phi = phi
                .checked_mul(norm.checked_pow(e - 1).ok_or(Error::Overflow("totient"))? * (norm - 1))
                .ok_or(Error::Overflow("totient"))?;
        }
        Ok(phi)
    }
}
