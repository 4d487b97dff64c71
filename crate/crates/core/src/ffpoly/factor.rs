use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Field, Poly};
use crate::error::{Error, Result};

/// Fixed seed used by [`factor`], so factorizations are reproducible.
pub const FACTOR_SEED: u64 = 0x5eed_f00d;

const SPLIT_ROUNDS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub unit: u32,
    /// Distinct monic irreducibles with multiplicities, sorted by degree then coefficients.
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    pub fn expand(&self, field: Field) -> Poly {
        self.factors
            .iter()
            .fold(Poly::constant(field, self.unit), |acc, (p, e)| acc.mul(&p.pow(*e)))
    }

    pub fn primes(&self) -> impl Iterator<Item = &Poly> {
        self.factors.iter().map(|(p, _)| p)
    }
}

/// Rabin's test: `f | T^{q^n} − T` and `gcd(T^{q^{n/r}} − T, f) = 1` for each prime `r | n`.
pub fn is_irreducible(f: &Poly) -> bool {
    let n = match f.degree() {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(n) => n,
    };
    let field = f.field();
    let t = Poly::t(field);
    // frob[k] = T^{q^k} mod f
    let mut frob = Vec::with_capacity(n + 1);
    frob.push(t.rem(f).expect("nonzero"));
    for k in 0..n {
        let next = frob[k].powmod(field.q() as u128, f).expect("nonzero");
        frob.push(next);
    }
    if frob[n] != frob[0] {
        return false;
    }
    crate::numeric::prime_divisors(n as u64)
        .into_iter()
        .all(|r| frob[n / r as usize].sub(&t).gcd(f).is_one())
}

/// Complete factorization with the default seed.
pub fn factor(f: &Poly) -> Result<Factorization> {
    factor_with_rng(f, &mut ChaCha8Rng::seed_from_u64(FACTOR_SEED))
}

/// Squarefree, distinct-degree, then Cantor–Zassenhaus equal-degree splitting.
pub fn factor_with_rng<R: Rng>(f: &Poly, rng: &mut R) -> Result<Factorization> {
    if f.is_zero() {
        return Err(Error::Precondition("cannot factor the zero polynomial".into()));
    }
    let (unit, monic) = f.to_monic();
    let mut factors: Vec<(Poly, u32)> = Vec::new();
    for (part, mult) in squarefree(&monic) {
        for (block, d) in distinct_degree(&part) {
            for prime in equal_degree(&block, d, rng)? {
                factors.push((prime, mult));
            }
        }
    }
    factors.sort();
    let mut merged: Vec<(Poly, u32)> = Vec::with_capacity(factors.len());
    for (p, e) in factors {
        match merged.last_mut() {
            Some((last, m)) if *last == p => *m += e,
            _ => merged.push((p, e)),
        }
    }
    Ok(Factorization { unit, factors: merged })
}

/// Squarefree decomposition of a monic polynomial: pairs `(g_i, i)` with `f = Π g_i^i`.
fn squarefree(f: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    if f.deg() == 0 {
        return out;
    }
    let p = f.field().p();
    let df = f.derivative();
    if df.is_zero() {
        for (g, e) in squarefree(&pth_root(f)) {
            out.push((g, e * p));
        }
        return out;
    }
    let mut c = f.gcd(&df);
    let mut w = f.div_exact(&c).expect("gcd divides");
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let fac = w.div_exact(&y).expect("gcd divides");
        if !fac.is_one() {
            out.push((fac, i));
        }
        w = y;
        c = c.div_exact(&w).expect("gcd divides");
        i += 1;
    }
    if !c.is_one() {
        for (g, e) in squarefree(&pth_root(&c)) {
            out.push((g, e * p));
        }
    }
    out
}

/// For `f = g(T^p)` over 𝔽_p returns `g`, which satisfies `g^p = f`.
fn pth_root(f: &Poly) -> Poly {
    let p = f.field().p() as usize;
    Poly::new(f.field(), f.coeffs().iter().step_by(p).copied().collect())
}

/// Splits a squarefree monic polynomial into products of irreducibles of equal degree.
fn distinct_degree(f: &Poly) -> Vec<(Poly, usize)> {
    let field = f.field();
    let t = Poly::t(field);
    let mut rest = f.clone();
    let mut h = t.rem(&rest).expect("nonzero");
    let mut out = Vec::new();
    let mut d = 0;
    while rest.deg() >= 2 * (d + 1) {
        d += 1;
        h = h.powmod(field.q() as u128, &rest).expect("nonzero");
        let g = h.sub(&t).gcd(&rest);
        if !g.is_one() {
            rest = rest.div_exact(&g).expect("gcd divides");
            h = h.rem(&rest).expect("nonzero");
            out.push((g, d));
        }
    }
    if rest.deg() > 0 {
        let d = rest.deg();
        out.push((rest, d));
    }
    out
}

fn equal_degree<R: Rng>(f: &Poly, d: usize, rng: &mut R) -> Result<Vec<Poly>> {
    let n = f.deg();
    if n == d {
        return Ok(vec![f.clone()]);
    }
    let field = f.field();
    let q = field.q() as u128;
    let exponent = q
        .checked_pow(d as u32)
        .map(|v| (v - 1) / 2)
        .ok_or(Error::Overflow("equal-degree splitting exponent"))?;
    for _ in 0..SPLIT_ROUNDS {
        let coeffs: Vec<u32> = (0..n).map(|_| rng.random_range(0..field.p())).collect();
        let r = Poly::new(field, coeffs);
        if r.is_constant() {
            continue;
        }
        let mut g = r.gcd(f);
        if g.is_one() {
            let h = r.powmod(exponent, f)?.sub(&Poly::one(field));
            g = h.gcd(f);
        }
        if !g.is_one() && g.deg() < n {
            let other = f.div_exact(&g).expect("gcd divides");
            let mut out = equal_degree(&g, d, rng)?;
            out.extend(equal_degree(&other, d, rng)?);
            return Ok(out);
        }
    }
    Err(Error::Internal(format!("equal-degree splitting of {f} failed after {SPLIT_ROUNDS} rounds")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::parse_poly;

    fn f3() -> Field {
        Field::new(3).unwrap()
    }

    fn p(s: &str) -> Poly {
        parse_poly(s, f3()).unwrap()
    }

    #[test]
    fn rabin_examples() {
        assert!(is_irreducible(&p("T^2+1")));
        assert!(!is_irreducible(&p("T^2+T+1")));
        assert!(is_irreducible(&p("T")));
        assert!(is_irreducible(&p("T^3+2*T+1")));
        assert!(!is_irreducible(&p("T^4+2*T^2+1")));
    }

    #[test]
    fn factor_examples() {
        let fac = factor(&p("T^2+T+1")).unwrap();
        assert_eq!(fac.factors, vec![(p("T+2"), 2)]);
        let fac = factor(&p("T^3+2*T")).unwrap();
        assert_eq!(fac.factors, vec![(p("T"), 1), (p("T+1"), 1), (p("T+2"), 1)]);
        let fac = factor(&p("2")).unwrap();
        assert_eq!(fac.unit, 2);
        assert!(fac.factors.is_empty());
    }

    #[test]
    fn factor_handles_pth_powers() {
        // (T^2+1)^3 (T+1)^4 · 2
        let f = p("T^2+1").pow(3).mul(&p("T+1").pow(4)).scale(2);
        let fac = factor(&f).unwrap();
        assert_eq!(fac.unit, 2);
        assert_eq!(fac.factors, vec![(p("T+1"), 4), (p("T^2+1"), 3)]);
        assert_eq!(fac.expand(f3()), f);
    }

    #[test]
    fn factor_splits_equal_degree_products() {
        let f = p("T^2+1").mul(&p("T^2+T+2")).mul(&p("T^2+2*T+2"));
        let fac = factor(&f).unwrap();
        assert_eq!(fac.factors.len(), 3);
        assert_eq!(fac.expand(f3()), f);
    }
}
