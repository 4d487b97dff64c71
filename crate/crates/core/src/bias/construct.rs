//! Explicit biased races and the extreme-bias criteria.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffpoly::{list_irreducibles, Poly};
use crate::unitgroup::{Modulus, ResidueClass};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TupleKind {
    /// `(1, (P₁P₂)⁴, …, (P₁P₂)^{2(r−1)}, P₁²)`, all quadratic residues.
    Quadratic,
    /// `(1, (P₁P₂)⁴, …, (P₁P₂)^{2(r−1)}, −1)`.
    General,
    /// A pair of tuples whose `Σ κ_j C_m` order disagrees with their density order.
    Martin { kappa: Vec<f64> },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionPrimes {
    /// A prime factor of `m` of largest degree.
    pub p_prime: Poly,
    /// Least-degree prime that is a non-residue mod `P′` and coprime to `m` (Martin kind only).
    pub p0: Option<Poly>,
    pub p1: Poly,
    pub p2: Poly,
}

#[derive(Clone, Debug, Serialize)]
pub struct TupleEntry {
    pub formula: String,
    pub poly: Poly,
    pub class: ResidueClass,
}

#[derive(Clone, Debug, Serialize)]
pub struct BiasedConstruction {
    pub kind: TupleKind,
    pub primes: ConstructionPrimes,
    pub tuple: Vec<TupleEntry>,
    /// The tuple with positions `1` and `r − 1` swapped, which reverses the sign of the bias.
    pub permuted: Vec<ResidueClass>,
    /// The second tuple `(b_j)` for the Martin kind.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partner: Option<Vec<TupleEntry>>,
    /// `(Σ κ_j C_m(a_j), Σ κ_j C_m(b_j))` for the Martin kind.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_scores: Option<(f64, f64)>,
}

impl BiasedConstruction {
    pub fn classes(&self) -> Vec<ResidueClass> {
        self.tuple.iter().map(|e| e.class.clone()).collect()
    }

    pub fn partner_classes(&self) -> Option<Vec<ResidueClass>> {
        self.partner.as_ref().map(|p| p.iter().map(|e| e.class.clone()).collect())
    }
}

/// Symbolic product `c · P₀^{e0} · P₁^{e1} · P₂^{e2}`.
#[derive(Clone, Copy)]
struct Term {
    neg: bool,
    e0: u32,
    e1: u32,
    e2: u32,
}

impl Term {
    const ONE: Term = Term { neg: false, e0: 0, e1: 0, e2: 0 };
    const MINUS_ONE: Term = Term { neg: true, e0: 0, e1: 0, e2: 0 };

    fn p1p2(e: u32) -> Term {
        Term { e1: e, e2: e, ..Term::ONE }
    }

    fn p0p1p2(e: u32) -> Term {
        Term { e0: 1, e1: e, e2: e, ..Term::ONE }
    }

    fn p1(e: u32) -> Term {
        Term { e1: e, ..Term::ONE }
    }

    fn p0() -> Term {
        Term { e0: 1, ..Term::ONE }
    }

    fn formula(self) -> String {
        let mut parts = Vec::new();
        if self.e0 > 0 {
            parts.push("P0".to_string());
        }
        match (self.e1, self.e2) {
            (0, 0) => {}
            (a, b) if a == b => parts.push(power("(P1*P2)", a)),
            (a, b) => {
                if a > 0 {
                    parts.push(power("P1", a));
                }
                if b > 0 {
                    parts.push(power("P2", b));
                }
            }
        }
        let body = if parts.is_empty() { "1".to_string() } else { parts.join("*") };
        if self.neg {
            format!("-{body}")
        } else {
            body
        }
    }
}

fn power(base: &str, e: u32) -> String {
    if e == 1 {
        base.to_string()
    } else {
        format!("{base}^{e}")
    }
}

struct Builder<'a> {
    modulus: &'a Modulus,
    primes: ConstructionPrimes,
}

impl Builder<'_> {
    fn entry(&self, t: Term) -> Result<TupleEntry> {
        let mut poly = self.primes.p1.pow(t.e1).mul(&self.primes.p2.pow(t.e2));
        if t.e0 > 0 {
            let p0 = self.primes.p0.as_ref().ok_or_else(|| Error::Internal("P0 not selected".into()))?;
            poly = poly.mul(&p0.pow(t.e0));
        }
        if t.neg {
            poly = poly.neg();
        }
        let class = self.modulus.class(&poly)?;
        Ok(TupleEntry { formula: t.formula(), poly, class })
    }

    fn tuple(&self, terms: &[Term]) -> Result<Vec<TupleEntry>> {
        let entries = terms.iter().map(|&t| self.entry(t)).collect::<Result<Vec<_>>>()?;
        for (j, e) in entries.iter().enumerate() {
            if let Some(k) = entries[..j].iter().position(|f| f.class == e.class) {
                return Err(Error::Infeasible(format!(
                    "entries {} = {} and {} = {} coincide modulo m",
                    k + 1,
                    entries[k].formula,
                    j + 1,
                    e.formula
                )));
            }
        }
        Ok(entries)
    }
}

/// Builds the explicit races used to demonstrate biases of size `≫ 1/M³` and `≫ 1/M`.
pub fn construct_biased_tuple(modulus: &Modulus, r: usize, kind: &TupleKind) -> Result<BiasedConstruction> {
    if r < 3 {
        return Err(Error::Precondition(format!("constructions need r ≥ 3, got {r}")));
    }
    let need_p0 = matches!(kind, TupleKind::Martin { .. });
    let primes = select_primes(modulus, need_p0)?;
    let b = Builder { modulus, primes };
    let r32 = r as u32;
    let (a_terms, b_terms, scores): (Vec<Term>, Option<Vec<Term>>, Option<&[f64]>) = match kind {
        TupleKind::Quadratic | TupleKind::General => {
            let mut t = vec![Term::ONE];
            t.extend((2..r32).map(|j| Term::p1p2(2 * j)));
            t.push(if *kind == TupleKind::Quadratic { Term::p1(2) } else { Term::MINUS_ONE });
            (t, None, None)
        }
        TupleKind::Martin { kappa } => {
            if kappa.len() != r {
                return Err(Error::Precondition(format!("κ has {} entries for r = {r}", kappa.len())));
            }
            let (a, b) = martin_terms(kappa, r32)?;
            (a, Some(b), Some(kappa.as_slice()))
        }
    };
    let tuple = b.tuple(&a_terms)?;
    let partner = b_terms.map(|t| b.tuple(&t)).transpose()?;
    let mut permuted: Vec<ResidueClass> = tuple.iter().map(|e| e.class.clone()).collect();
    permuted.swap(0, r - 2);
    let kappa_scores = scores.map(|kappa| {
        let score = |entries: &[TupleEntry]| -> f64 {
            entries.iter().zip(kappa).map(|(e, k)| k * modulus.cm(&e.class) as f64).sum()
        };
        (score(&tuple), score(partner.as_deref().unwrap_or(&[])))
    });
    Ok(BiasedConstruction { kind: kind.clone(), primes: b.primes, tuple, permuted, partner, kappa_scores })
}

fn martin_terms(kappa: &[f64], r: u32) -> Result<(Vec<Term>, Vec<Term>)> {
    let ru = r as usize;
    if let Some(&k) = [kappa[ru - 1], kappa[0]].iter().find(|k| **k != 0.0) {
        let mut a = vec![Term::ONE];
        let mut b;
        if k > 0.0 {
            a.extend((2..r).map(|j| Term::p0p1p2(2 * j)));
            a.push(Term::p1p2(2));
            b = a.clone();
            b[ru - 1] = Term::p0();
        } else {
            a.extend((2..=r).map(|j| Term::p0p1p2(2 * j)));
            b = a.clone();
            b[ru - 1] = Term::p1(2);
        }
        if kappa[ru - 1] == 0.0 {
            // Only κ₁ ≠ 0: mirror the construction by swapping the first and last entries.
            a.swap(0, ru - 1);
            b.swap(0, ru - 1);
        }
        return Ok((a, b));
    }
    let l = (1..ru - 1)
        .find(|&i| kappa[i] != 0.0)
        .ok_or_else(|| Error::Precondition("κ must not be the zero vector".into()))?;
    let lj = l as u32 + 1;
    if kappa[l] > 0.0 {
        let mut a = vec![Term::ONE];
        for j in 2..=r {
            a.push(if j == lj { Term::p1p2(2) } else { Term::p0p1p2(4 * j) });
        }
        let mut b = a.clone();
        b[l] = Term::p0p1p2(4 * lj);
        b[ru - 1] = Term::p0();
        Ok((a, b))
    } else {
        let mut a = vec![Term::ONE];
        a.extend((2..r).map(|j| Term::p0p1p2(4 * j)));
        a.push(Term::p1p2(4));
        let mut b = a.clone();
        b[l] = Term::p1p2(4);
        b[ru - 1] = Term::p1(2);
        Ok((a, b))
    }
}

fn select_primes(modulus: &Modulus, need_p0: bool) -> Result<ConstructionPrimes> {
    let field = modulus.field();
    let q = field.q();
    let m = modulus.poly();
    let big_m = modulus.degree();
    let p_prime = modulus
        .factorization()
        .primes()
        .max_by(|a, b| a.deg().cmp(&b.deg()).then_with(|| b.cmp(a)))
        .cloned()
        .ok_or_else(|| Error::Precondition("modulus has no prime factor".into()))?;
    let p0 = if need_p0 {
        if q % 2 == 0 {
            return Err(Error::Infeasible("P0: every unit is a square in characteristic 2".into()));
        }
        let bound = 2.0 + 2.0 * (1.0 + p_prime.deg() as f64).ln() / (q as f64).ln();
        let norm = (q as u128)
            .checked_pow(p_prime.deg() as u32)
            .ok_or(Error::Overflow("norm of the largest prime factor"))?;
        let half = (norm - 1) / 2;
        let minus_one = field.constant(-1);
        let mut found = None;
        'search: for d in 1..=bound.floor() as usize {
            for cand in list_irreducibles(field, d) {
                if cand.divides(m) {
                    continue;
                }
                if cand.powmod(half, &p_prime)? == minus_one {
                    found = Some(cand);
                    break 'search;
                }
            }
        }
        Some(found.ok_or_else(|| {
            Error::Infeasible(format!("P0: no prime of degree ≤ {bound:.2} is a non-residue mod {p_prime}"))
        })?)
    } else {
        None
    };
    let norm_bound = 2 * q as u128 * big_m as u128;
    let mut small = Vec::new();
    let mut d = 1usize;
    while (q as u128).pow(d as u32) <= norm_bound && small.len() < 2 {
        for cand in list_irreducibles(field, d) {
            if !cand.divides(m) && Some(&cand) != p0.as_ref() {
                small.push(cand);
                if small.len() == 2 {
                    break;
                }
            }
        }
        d += 1;
    }
    if small.len() < 2 {
        let missing = if small.is_empty() { "P1" } else { "P2" };
        return Err(Error::Infeasible(format!("{missing}: fewer than two primes of norm ≤ {norm_bound} avoid m")));
    }
    let p2 = small.pop().unwrap();
    let p1 = small.pop().unwrap();
    Ok(ConstructionPrimes { p_prime, p0, p1, p2 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ExtremeBias {
    BiasedByNegation { pair: (usize, usize) },
    BiasedByPrimePowerRatio { pair: (usize, usize), ratio: Poly },
    NotExtreme,
}

/// Checks the two extreme-bias conditions over all ordered pairs: `a_j + a_k = 0`, then
/// `a_j / a_k` a monic prime power. Returns the first witness in index order.
pub fn extremely_biased_classifier(classes: &[Poly], bound: usize) -> Result<ExtremeBias> {
    if let Some(a) = classes.iter().find(|a| a.is_zero() || a.deg() > bound) {
        return Err(Error::Precondition(format!("{a} exceeds the degree bound {bound}")));
    }
    let n = classes.len();
    for j in 0..n {
        for k in 0..n {
            if j != k && (&classes[j] + &classes[k]).is_zero() {
                return Ok(ExtremeBias::BiasedByNegation { pair: (j, k) });
            }
        }
    }
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            if let Some(ratio) = classes[j].div_exact(&classes[k]) {
                if ratio.von_mangoldt() > 0 {
                    return Ok(ExtremeBias::BiasedByPrimePowerRatio { pair: (j, k), ratio });
                }
            }
        }
    }
    Ok(ExtremeBias::NotExtreme)
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleWitness {
    /// `σ` as a zero-based permutation of `{0, 1, 2}`.
    pub sigma: [usize; 3],
    /// `Λ₀(X_{σ(1)}) + Λ₀(X_{σ(2)}) − 2Λ₀(X_{σ(3)})` in log-q units.
    #[serde(serialize_with = "crate::numeric::rational_serde::one")]
    pub value: Rational,
    #[serde(serialize_with = "crate::numeric::rational_serde::many")]
    pub lambda0: [Rational; 3],
}

/// Searches the permutations of the ratios `X₁ = Pmax/Pmin(a₁,a₂)`, `X₂ = …(a₂,a₃)`,
/// `X₃ = …(a₁,a₃)` for a nonzero combination `Λ₀(X_σ1) + Λ₀(X_σ2) − 2Λ₀(X_σ3)`.
pub fn lambda0_triple_test(a1: &Poly, a2: &Poly, a3: &Poly) -> Result<Option<TripleWitness>> {
    let degs = [a1.deg(), a2.deg(), a3.deg()];
    if [a1, a2, a3].iter().any(|a| a.is_zero()) || degs[0] == degs[1] || degs[1] == degs[2] || degs[0] == degs[2] {
        return Err(Error::Precondition("the triple test needs nonzero entries of distinct degrees".into()));
    }
    let ratio = |x: &Poly, y: &Poly| -> Rational {
        let (big, small) = if x.deg() > y.deg() { (x, y) } else { (y, x) };
        big.div_exact(small).map(|r| r.lambda0()).unwrap_or_else(Rational::zero)
    };
    let lambda0 = [ratio(a1, a2), ratio(a2, a3), ratio(a1, a3)];
    if lambda0.iter().all(Zero::is_zero) {
        return Ok(None);
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for sigma in PERMS {
        let two = Rational::from_integer(2.into());
        let value = &lambda0[sigma[0]] + &lambda0[sigma[1]] - two * &lambda0[sigma[2]];
        if !value.is_zero() {
            debug_assert!(value.is_positive() || value.is_negative());
            return Ok(Some(TripleWitness { sigma, value, lambda0 }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::Field;

    fn f3() -> Field {
        Field::new(3).unwrap()
    }

    #[test]
    fn quadratic_tuple_is_all_residues() {
        let m = Modulus::new(&f3().parse("T^8+T^4+2*T+1").unwrap()).unwrap();
        let c = construct_biased_tuple(&m, 3, &TupleKind::Quadratic).unwrap();
        assert_eq!(c.tuple[1].formula, "(P1*P2)^4");
        assert_eq!(c.tuple[2].formula, "P1^2");
        assert!(c.tuple.iter().all(|e| m.is_quadratic_residue(&e.class)));
        assert_eq!(c.permuted[1], c.tuple[0].class);
    }

    #[test]
    fn general_tuple_ends_with_minus_one() {
        let m = Modulus::new(&f3().parse("T^8+T^4+2*T+1").unwrap()).unwrap();
        let c = construct_biased_tuple(&m, 4, &TupleKind::General).unwrap();
        assert_eq!(c.tuple[3].poly, f3().constant(-1));
        assert_eq!(c.tuple.len(), 4);
    }

    #[test]
    fn martin_scores_order() {
        let m = Modulus::new(&f3().parse("T^8+T^4+2*T+1").unwrap()).unwrap();
        for kappa in [vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -2.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, -1.0, 0.0]] {
            let c = construct_biased_tuple(&m, 3, &TupleKind::Martin { kappa: kappa.clone() }).unwrap();
            let (sa, sb) = c.kappa_scores.unwrap();
            assert!(sa > sb, "κ = {kappa:?}: {sa} ≤ {sb}");
            assert!(c.primes.p0.is_some());
        }
    }

    #[test]
    fn classifier_examples() {
        let f = f3();
        let p1 = f.parse("T").unwrap();
        let p2 = f.parse("T+1").unwrap();
        let one = f.one();
        let neg = extremely_biased_classifier(&[one.clone(), f.constant(-1), p1.clone()], 10).unwrap();
        assert_eq!(neg, ExtremeBias::BiasedByNegation { pair: (0, 1) });
        let sq = p1.pow(2);
        let big = p1.mul(&p2).pow(4);
        let v = extremely_biased_classifier(&[one.clone(), sq.clone(), big.clone()], 10).unwrap();
        assert!(matches!(v, ExtremeBias::BiasedByPrimePowerRatio { pair: (1, 0), .. }));
        let q1 = f.parse("T+2").unwrap();
        let q2 = f.parse("T^2+1").unwrap();
        let plain = [one, p1.mul(&p2), p1.mul(&p2).mul(&q1).mul(&q2)];
        assert_eq!(extremely_biased_classifier(&plain, 10).unwrap(), ExtremeBias::NotExtreme);
        assert!(extremely_biased_classifier(&plain, 2).is_err());
    }

    #[test]
    fn triple_test() {
        let f = f3();
        let p = f.parse("T+1").unwrap();
        let w = lambda0_triple_test(&f.one(), &p, &p.pow(2)).unwrap().unwrap();
        assert!(!w.value.is_zero());
        let a = f.parse("T^2+T").unwrap();
        let b = a.mul(&f.parse("T^2+2").unwrap()).mul(&f.parse("T+1").unwrap());
        assert!(lambda0_triple_test(&f.one(), &a, &b).unwrap().is_none());
        assert!(lambda0_triple_test(&f.one(), &p, &f.parse("T").unwrap()).is_err());
    }
}
