//! The unit group `(𝔽_q[T]/(m))*`: invariant-factor basis, discrete logarithms,
//! square roots and the bias constant `C_m(a)`.
//!
//! Residues of degree `< M` are encoded by their base-q digit index. Units are
//! additionally encoded by a *flat exponent*: the exponent vector `(e_1, …, e_k)`
//! with respect to the generators, read in mixed radix with `e_1` least significant.

mod snf;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffpoly::{factor, Factorization, Field, Poly};

pub const DEFAULT_PHI_CAP: u64 = 2_000_000;

const NON_UNIT: u32 = u32::MAX;

/// Largest residue table we are willing to allocate.
const MAX_RESIDUES: u64 = 1 << 28;

#[derive(Clone, Debug)]
pub struct Modulus {
    m: Poly,
    factorization: Factorization,
    phi: u64,
    generators: Vec<Poly>,
    orders: Vec<u64>,
    /// residue index → flat exponent, `NON_UNIT` for non-units
    dlog: Vec<u32>,
    /// flat exponent → residue index
    exp: Vec<u32>,
}

/// A unit modulo `m`, stored as its least-degree representative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResidueClass {
    rep: Poly,
    flat: u32,
}

impl ResidueClass {
    pub fn rep(&self) -> &Poly {
        &self.rep
    }

    /// Position of the class in the mixed-radix exponent encoding.
    pub fn flat(&self) -> u32 {
        self.flat
    }
}

impl Serialize for ResidueClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.rep)
    }
}

impl std::fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.rep)
    }
}

impl Modulus {
    pub fn new(m: &Poly) -> Result<Self> {
        Self::with_cap(m, DEFAULT_PHI_CAP)
    }

    pub fn with_cap(m: &Poly, phi_cap: u64) -> Result<Self> {
        let degree = match m.degree() {
            Some(d) if d >= 1 && m.is_monic() => d,
            _ => return Err(Error::Precondition(format!("modulus {m} must be monic of degree ≥ 1"))),
        };
        let field = m.field();
        let factorization = factor(m)?;
        let phi = totient(field, &factorization).ok_or(Error::Overflow("phi(m)"))?;
        if phi > phi_cap {
            return Err(Error::ModulusTooLarge { phi, cap: phi_cap });
        }
        let residues = field
            .norm_of_degree(degree)
            .filter(|&n| n <= MAX_RESIDUES)
            .ok_or(Error::ModulusTooLarge { phi, cap: phi_cap })?;

        let is_unit = unit_mask(field, degree, residues as usize, &factorization);
        let counted = is_unit.iter().filter(|&&u| u).count() as u64;
        if counted != phi {
            return Err(Error::Internal(format!("unit census {counted} disagrees with phi(m) = {phi}")));
        }

        let mut builder = BasisBuilder::new(m.clone(), residues as usize);
        for idx in 0..residues as usize {
            if builder.size() == phi {
                break;
            }
            if is_unit[idx] && builder.dlog[idx] == NON_UNIT {
                builder.extend(Poly::from_index(field, idx as u64))?;
            }
        }
        // Invariant factors in decreasing order: d_{i+1} | d_i.
        builder.gens.reverse();
        builder.orders.reverse();
        builder.rebuild();
        debug_assert_eq!(builder.size(), phi);

        Ok(Modulus {
            m: m.clone(),
            factorization,
            phi,
            generators: builder.gens,
            orders: builder.orders,
            dlog: builder.dlog,
            exp: builder.exp,
        })
    }

    pub fn field(&self) -> Field {
        self.m.field()
    }

    pub fn q(&self) -> u64 {
        self.m.field().q()
    }

    pub fn poly(&self) -> &Poly {
        &self.m
    }

    /// `M = deg m`.
    pub fn degree(&self) -> usize {
        self.m.deg()
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    /// Orders `d_1, …, d_k` with `d_{i+1} | d_i`.
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// Exponent of the group, `d_1` (1 for the trivial group).
    pub fn exponent(&self) -> u64 {
        self.orders.first().copied().unwrap_or(1)
    }

    /// Number of residues of degree `< M`, i.e. `q^M`.
    pub fn residue_count(&self) -> usize {
        self.dlog.len()
    }

    /// Flat exponent of the residue with the given base-q index, if it is a unit.
    #[inline]
    pub fn flat_of_index(&self, index: usize) -> Option<u32> {
        let v = self.dlog[index];
        (v != NON_UNIT).then_some(v)
    }

    #[inline]
    pub fn index_of_flat(&self, flat: u32) -> usize {
        self.exp[flat as usize] as usize
    }

    /// Reduces `f` modulo `m`; errors if the result is not a unit.
    pub fn class(&self, f: &Poly) -> Result<ResidueClass> {
        self.try_class(f).ok_or_else(|| Error::NotCoprime { poly: f.to_string() })
    }

    pub fn try_class(&self, f: &Poly) -> Option<ResidueClass> {
        if f.field() != self.field() {
            return None;
        }
        let rep = f.rem(&self.m).ok()?;
        let flat = self.flat_of_index(rep.index() as usize)?;
        Some(ResidueClass { rep, flat })
    }

    pub fn class_from_flat(&self, flat: u32) -> ResidueClass {
        let rep = Poly::from_index(self.field(), self.exp[flat as usize] as u64);
        ResidueClass { rep, flat }
    }

    pub fn one(&self) -> ResidueClass {
        self.class_from_flat(0)
    }

    /// All units in increasing order of their representatives.
    pub fn units(&self) -> impl Iterator<Item = ResidueClass> + '_ {
        let field = self.field();
        self.dlog.iter().enumerate().filter(|(_, &f)| f != NON_UNIT).map(move |(idx, &flat)| ResidueClass {
            rep: Poly::from_index(field, idx as u64),
            flat,
        })
    }

    pub fn exponents(&self, flat: u32) -> Vec<u64> {
        let mut rest = flat as u64;
        self.orders
            .iter()
            .map(|&d| {
                let e = rest % d;
                rest /= d;
                e
            })
            .collect()
    }

    pub fn flat_from_exponents(&self, exps: &[u64]) -> u32 {
        let mut flat = 0u64;
        for (&e, &d) in exps.iter().zip(&self.orders).rev() {
            flat = flat * d + e % d;
        }
        flat as u32
    }

    pub fn mul_flat(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a as u64, b as u64);
        let (mut out, mut scale) = (0u64, 1u64);
        for &d in &self.orders {
            out += ((a % d + b % d) % d) * scale;
            scale *= d;
            a /= d;
            b /= d;
        }
        out as u32
    }

    pub fn inv_flat(&self, a: u32) -> u32 {
        let mut a = a as u64;
        let (mut out, mut scale) = (0u64, 1u64);
        for &d in &self.orders {
            out += ((d - a % d) % d) * scale;
            scale *= d;
            a /= d;
        }
        out as u32
    }

    pub fn pow_flat(&self, a: u32, k: i64) -> u32 {
        let mut a = a as u64;
        let (mut out, mut scale) = (0u64, 1u64);
        for &d in &self.orders {
            let e = ((a % d) as i128 * k as i128).rem_euclid(d as i128) as u64;
            out += e * scale;
            scale *= d;
            a /= d;
        }
        out as u32
    }

    pub fn mul(&self, a: &ResidueClass, b: &ResidueClass) -> ResidueClass {
        self.class_from_flat(self.mul_flat(a.flat, b.flat))
    }

    pub fn inv(&self, a: &ResidueClass) -> ResidueClass {
        self.class_from_flat(self.inv_flat(a.flat))
    }

    /// `a / b`.
    pub fn div(&self, a: &ResidueClass, b: &ResidueClass) -> ResidueClass {
        self.class_from_flat(self.mul_flat(a.flat, self.inv_flat(b.flat)))
    }

    pub fn neg(&self, a: &ResidueClass) -> ResidueClass {
        self.class(&a.rep.neg()).expect("negation preserves units")
    }

    /// Number of `b` with `b² ≡ a`.
    pub fn square_root_count(&self, a: &ResidueClass) -> u64 {
        self.exponents(a.flat)
            .iter()
            .zip(&self.orders)
            .map(|(&e, &d)| match (d % 2, e % 2) {
                (1, _) => 1,
                (_, 0) => 2,
                _ => 0,
            })
            .product()
    }

    /// `C_m(a)`: the number of square roots of `a`, minus one.
    pub fn cm(&self, a: &ResidueClass) -> i64 {
        self.square_root_count(a) as i64 - 1
    }

    pub fn is_quadratic_residue(&self, a: &ResidueClass) -> bool {
        self.square_root_count(a) > 0
    }

    /// Order of the unit in the group.
    pub fn order_of(&self, a: &ResidueClass) -> u64 {
        self.exponents(a.flat)
            .iter()
            .zip(&self.orders)
            .map(|(&e, &d)| d / crate::numeric::gcd(e, d))
            .fold(1, |acc, o| crate::numeric::lcm(acc, o).expect("divides phi"))
    }
}

/// `φ(m) = Π |P|^{e−1}(|P| − 1)`.
fn totient(field: Field, fac: &Factorization) -> Option<u64> {
    let mut phi = 1u64;
    for (prime, e) in &fac.factors {
        let norm = field.norm_of_degree(prime.deg())?;
        let local = norm.checked_pow(e - 1)?.checked_mul(norm - 1)?;
        phi = phi.checked_mul(local)?;
    }
    Some(phi)
}

/// Marks residues of degree `< M` coprime to `m` by striking out the multiples `P·g`.
fn unit_mask(field: Field, degree: usize, residues: usize, fac: &Factorization) -> Vec<bool> {
    let mut mask = vec![true; residues];
    mask[0] = false;
    for prime in fac.primes() {
        let d = prime.deg();
        let cofactors = field.norm_of_degree(degree - d).unwrap();
        for g in 1..cofactors {
            let multiple = prime.mul(&Poly::from_index(field, g));
            mask[multiple.index() as usize] = false;
        }
    }
    mask
}

/// Incrementally grows a subgroup `H` with an invariant-factor basis until it fills the group.
struct BasisBuilder {
    m: Poly,
    gens: Vec<Poly>,
    orders: Vec<u64>,
    dlog: Vec<u32>,
    exp: Vec<u32>,
}

impl BasisBuilder {
    fn new(m: Poly, residues: usize) -> Self {
        let mut dlog = vec![NON_UNIT; residues];
        dlog[1] = 0;
        BasisBuilder { m, gens: Vec::new(), orders: Vec::new(), dlog, exp: vec![1] }
    }

    fn size(&self) -> u64 {
        self.exp.len() as u64
    }

    fn mulmod(&self, a: &Poly, b: &Poly) -> Poly {
        a.mulmod(b, &self.m).expect("nonzero modulus")
    }

    /// Adds `x ∉ H` and re-diagonalizes the relation lattice.
    fn extend(&mut self, x: Poly) -> Result<()> {
        let mut y = x.clone();
        let mut n: u64 = 1;
        while self.dlog[y.index() as usize] == NON_UNIT {
            y = self.mulmod(&y, &x);
            n += 1;
        }
        let k = self.gens.len();
        let c = decode(self.dlog[y.index() as usize], &self.orders);

        // Relations: d_i·g_i = 0 and n·x − Σ c_i g_i = 0.
        let mut rel = vec![vec![0i128; k + 1]; k + 1];
        for i in 0..k {
            rel[i][i] = self.orders[i] as i128;
        }
        for i in 0..k {
            rel[k][i] = -(c[i] as i128);
        }
        rel[k][k] = n as i128;
        let smith = snf::smith(rel)?;

        let order_x = n * order_in(&c, &self.orders);
        let mut old_orders = self.orders.clone();
        old_orders.push(order_x);
        let mut old_gens = std::mem::take(&mut self.gens);
        old_gens.push(x);

        let mut gens = Vec::new();
        let mut orders = Vec::new();
        for (j, &d) in smith.diag.iter().enumerate() {
            if d <= 1 {
                continue;
            }
            let mut h = Poly::one(self.m.field());
            for (i, g) in old_gens.iter().enumerate() {
                let e = smith.w[j][i].rem_euclid(old_orders[i] as i128) as u128;
                if e != 0 {
                    h = self.mulmod(&h, &g.powmod(e, &self.m)?);
                }
            }
            gens.push(h);
            orders.push(d as u64);
        }
        self.gens = gens;
        self.orders = orders;
        self.rebuild();
        Ok(())
    }

    /// Refills both tables by walking the subgroup with an odometer over the exponents.
    fn rebuild(&mut self) {
        let total: u64 = self.orders.iter().product();
        for v in self.dlog.iter_mut() {
            *v = NON_UNIT;
        }
        self.exp = Vec::with_capacity(total as usize);
        let k = self.orders.len();
        let mut digits = vec![0u64; k];
        let mut cur = Poly::one(self.m.field());
        for flat in 0..total {
            let idx = cur.index() as usize;
            debug_assert_eq!(self.dlog[idx], NON_UNIT, "generators are not independent");
            self.dlog[idx] = flat as u32;
            self.exp.push(idx as u32);
            // Advance: multiplying by g_j after wrapping digit j is correct since g_j^{d_j} = 1.
            let mut j = 0;
            while j < k {
                cur = self.mulmod(&cur, &self.gens[j]);
                digits[j] += 1;
                if digits[j] < self.orders[j] {
                    break;
                }
                digits[j] = 0;
                j += 1;
            }
        }
    }
}

fn decode(flat: u32, orders: &[u64]) -> Vec<u64> {
    let mut rest = flat as u64;
    orders
        .iter()
        .map(|&d| {
            let e = rest % d;
            rest /= d;
            e
        })
        .collect()
}

fn order_in(exps: &[u64], orders: &[u64]) -> u64 {
    exps.iter()
        .zip(orders)
        .map(|(&e, &d)| d / crate::numeric::gcd(e, d))
        .fold(1, |acc, o| crate::numeric::lcm(acc, o).expect("small"))
}
