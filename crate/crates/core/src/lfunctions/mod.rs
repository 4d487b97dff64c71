//! Dirichlet L-polynomials `ℒ(u, χ) = Σ_{f monic} χ(f) u^{deg f}`, their inverse zeros,
//! the prime power sums `ψ_n(χ)`, `I(χ)` and `L′/L(1, χ)`.

mod roots;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::characters::{Character, CharacterGroup};
use crate::error::{Error, Result};
use crate::ffpoly::{list_irreducibles, Poly};
use crate::numeric::{ComplexSum, Neumaier};

pub use roots::{find_roots, Root, CLUSTER_TOL};

/// Relative tolerance used to classify an inverse zero by its modulus.
pub const CLASSIFY_TOL: f64 = 1e-6;

/// Default bound on `deg m` for L-polynomial tables.
pub const DEFAULT_DEGREE_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    /// `|γ| = √q`
    SqrtQ,
    /// `|γ| = 1`, from the imprimitive factors
    Unit,
    /// `γ = 1` from the factor `(1 − u)` of an even character
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InverseZero {
    pub gamma: Complex64,
    /// Argument of `γ` in `[−π, π]`.
    pub theta: f64,
    pub kind: ZeroKind,
    pub multiplicity: usize,
}

impl InverseZero {
    /// `|γ/(γ−1)|²`.
    pub fn weight(&self) -> f64 {
        (self.gamma / (self.gamma - 1.0)).norm_sqr()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LData {
    pub character: usize,
    /// `c_0 = 1, c_1, …, c_d` with `c_d ≠ 0`.
    pub coeffs: Vec<Complex64>,
    pub zeros: Vec<InverseZero>,
    pub trivial_factor: bool,
    pub principal: bool,
}

impl LData {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn zero_count(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    pub fn sqrt_q_zeros(&self) -> impl Iterator<Item = &InverseZero> {
        self.zeros.iter().filter(|z| z.kind == ZeroKind::SqrtQ)
    }

    /// `ℒ(u)`.
    pub fn eval(&self, u: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
    }

    /// `ℒ′(u)`.
    pub fn eval_derivative(&self, u: Complex64) -> Complex64 {
        eval_derivative(&self.coeffs, u)
    }

    /// `I(χ) = ½ Σ |γ/(γ−1)|²` over the zeros of modulus `√q`.
    pub fn i_chi(&self) -> f64 {
        0.5 * self.sqrt_q_zeros().map(|z| z.multiplicity as f64 * z.weight()).collect::<Neumaier>().value()
    }

    /// `−Σ γ^n` over all inverse zeros, counted with multiplicity.
    pub fn psi_from_zeros(&self, n: u32) -> Complex64 {
        let mut acc = ComplexSum::default();
        for z in &self.zeros {
            acc.add(-z.gamma.powu(n) * z.multiplicity as f64);
        }
        acc.value()
    }

    /// `L′/L(1, χ) = −(log q / q)·ℒ′(1/q)/ℒ(1/q)`, in natural-log units.
    pub fn log_deriv_at_one(&self, q: u64) -> Complex64 {
        log_deriv_at_one(&self.coeffs, q)
    }
}

fn eval_derivative(coeffs: &[Complex64], u: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (n, &c)| acc * u + c * n as f64)
}

fn eval(coeffs: &[Complex64], u: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
}

fn log_deriv_at_one(coeffs: &[Complex64], q: u64) -> Complex64 {
    let qf = q as f64;
    let u = Complex64::new(1.0 / qf, 0.0);
    -(qf.ln() / qf) * eval_derivative(coeffs, u) / eval(coeffs, u)
}

/// L-data for every character modulo `m`.
#[derive(Clone, Debug)]
pub struct LTable {
    group: Arc<CharacterGroup>,
    data: Vec<LData>,
}

impl LTable {
    pub fn new(group: Arc<CharacterGroup>) -> Result<Self> {
        Self::with_degree_cap(group, DEFAULT_DEGREE_CAP)
    }

    pub fn with_degree_cap(group: Arc<CharacterGroup>, degree_cap: usize) -> Result<Self> {
        let modulus = group.modulus();
        if modulus.degree() > degree_cap {
            return Err(Error::DegreeCap { degree: modulus.degree(), cap: degree_cap });
        }
        let table = coefficient_table(&group);
        let q = modulus.q();
        let data = table
            .into_par_iter()
            .enumerate()
            .map(|(index, coeffs)| build_ldata(group.get(index), coeffs, q))
            .collect::<Result<Vec<_>>>()?;
        Ok(LTable { group, data })
    }

    pub fn group(&self) -> &CharacterGroup {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<CharacterGroup> {
        &self.group
    }

    pub fn get(&self, index: usize) -> &LData {
        &self.data[index]
    }

    pub fn data(&self) -> &[LData] {
        &self.data
    }

    /// Non-principal entries.
    pub fn nonprincipal(&self) -> impl Iterator<Item = &LData> {
        self.data.iter().filter(|l| !l.principal)
    }

    /// `ψ_n(χ) = Σ_{deg f = n} χ(f) Λ(f)` in log-q units.
    ///
    /// For non-principal `χ` this is `−Σ γ^n`; for the principal character it is `q^n`
    /// minus the prime powers of the primes dividing `m`.
    pub fn psi_power_sum(&self, index: usize, n: u32) -> Complex64 {
        let l = &self.data[index];
        if !l.principal {
            return l.psi_from_zeros(n);
        }
        let modulus = self.group.modulus();
        let q = modulus.q() as f64;
        let mut total = q.powi(n as i32);
        for prime in modulus.factorization().primes() {
            let d = prime.deg() as u32;
            if n % d == 0 {
                total -= d as f64;
            }
        }
        Complex64::new(total, 0.0)
    }

    /// Coefficients of `ℒ(u, χ*)`: the imprimitive factors `1 − χ*(P)u^{deg P}` for
    /// `P | m`, `P ∤ m(χ*)` divided out.
    pub fn primitive_coeffs(&self, index: usize) -> Result<Vec<Complex64>> {
        let chi = self.group.get(index);
        let mut coeffs = self.data[index].coeffs.clone();
        if chi.is_principal() {
            return Ok(vec![Complex64::new(1.0, 0.0)]);
        }
        for prime in self.group.modulus().factorization().primes() {
            if chi.conductor.deg() > 0 && prime.divides(&chi.conductor) {
                continue;
            }
            let value = self.group.primitive_value(chi, prime)?.to_complex();
            let mut divisor = vec![Complex64::new(0.0, 0.0); prime.deg() + 1];
            divisor[0] = Complex64::new(1.0, 0.0);
            divisor[prime.deg()] = -value;
            coeffs = divide_unit_constant(&coeffs, &divisor)?;
        }
        Ok(coeffs)
    }

    /// The closed form for `I(χ)` in terms of `M(χ*)`, `Re L′/L(1, χ*)` and the parity of `χ*`.
    ///
    /// The sign `χ*(−1)` is taken as `+1` for characters trivial on all constants and `−1`
    /// otherwise, which is what controls the factor `(1 − u)` of `ℒ(u, χ*)`.
    pub fn i_chi_exact_formula(&self, index: usize) -> Result<f64> {
        let chi = self.group.get(index);
        if chi.is_principal() {
            return Err(Error::Precondition("I(χ) is defined for non-principal characters".into()));
        }
        let q = self.group.modulus().q() as f64;
        let primitive = self.primitive_coeffs(index)?;
        let ld = log_deriv_at_one(&primitive, q as u64).re;
        let eps = chi.parity_sign() as f64;
        let q1 = q - 1.0;
        let twice = q / q1 * chi.conductor_degree as f64 + 2.0 * q / (q1 * q.ln()) * ld
            - (q * q + q) / (2.0 * q1 * q1) * eps
            - (3.0 * q * q - q) / (2.0 * q1 * q1);
        Ok(twice / 2.0)
    }

    /// `ψ_n(χ)` by enumerating monic prime powers of degree `n` (test oracle, small `n`).
    pub fn psi_brute_force(&self, index: usize, n: u32) -> Complex64 {
        psi_brute_force(&self.group, self.group.get(index), n)
    }
}

/// `Σ_{d | n} d · Σ_{deg P = d} χ(P)^{n/d}`.
pub fn psi_brute_force(group: &CharacterGroup, chi: &Character, n: u32) -> Complex64 {
    let mut acc = ComplexSum::default();
    for d in crate::numeric::divisors(n as u64) {
        for prime in list_irreducibles(group.field(), d as usize) {
            if let Some(v) = group.evaluate(chi, &prime) {
                acc.add(v.pow((n as u64 / d) as i64).to_complex() * d as f64);
            }
        }
    }
    acc.value()
}

/// Exact division by a polynomial with constant term 1; errors if the remainder is not negligible.
fn divide_unit_constant(num: &[Complex64], den: &[Complex64]) -> Result<Vec<Complex64>> {
    let dn = den.len() - 1;
    if num.len() <= dn {
        return Err(Error::Numerical("imprimitive factor does not divide ℒ(u, χ)".into()));
    }
    let len = num.len() - dn;
    let mut quot = vec![Complex64::new(0.0, 0.0); len];
    for k in 0..len {
        let mut v = num[k];
        for j in 1..=dn.min(k) {
            v -= den[j] * quot[k - j];
        }
        quot[k] = v;
    }
    // Check the top coefficients reproduce.
    let scale = num.iter().map(|c| c.norm()).fold(1.0, f64::max);
    for k in len..num.len() {
        let mut v = Complex64::new(0.0, 0.0);
        for j in 0..=dn {
            if k >= j && k - j < len {
                v += den[j] * quot[k - j];
            }
        }
        if (v - num[k]).norm() > 1e-8 * scale {
            return Err(Error::Numerical("imprimitive factor does not divide ℒ(u, χ)".into()));
        }
    }
    Ok(quot)
}

/// `c_n(χ)` for every character and `0 ≤ n < M`, via degree histograms over the unit
/// group and one abelian-group DFT per degree. Row `i` belongs to character `i`.
pub fn coefficient_table(group: &CharacterGroup) -> Vec<Vec<Complex64>> {
    let modulus = group.modulus();
    let phi = modulus.phi() as usize;
    let big_m = modulus.degree();
    let q = modulus.q() as usize;
    let mut rows = vec![vec![Complex64::new(1.0, 0.0)]; phi];
    let mut planner = FftPlanner::<f64>::new();
    let mut qn = 1usize;
    for _n in 1..big_m {
        qn *= q;
        let mut hist = vec![Complex64::new(0.0, 0.0); phi];
        // Monic f of degree n has base-q index in [q^n, 2q^n).
        for idx in qn..2 * qn {
            if let Some(flat) = modulus.flat_of_index(idx) {
                hist[flat as usize].re += 1.0;
            }
        }
        group_dft(&mut hist, modulus.orders(), &mut planner);
        for (row, v) in rows.iter_mut().zip(hist) {
            row.push(snap(v));
        }
    }
    for row in rows.iter_mut() {
        let scale = row.iter().map(|c| c.norm()).fold(1.0, f64::max);
        while row.len() > 1 && row.last().unwrap().norm() < 1e-7 * scale {
            row.pop();
        }
    }
    rows
}

/// Rounds components that are integers up to float noise.
fn snap(v: Complex64) -> Complex64 {
    let fix = |x: f64| if (x - x.round()).abs() < 1e-9 * x.abs().max(1.0) { x.round() } else { x };
    Complex64::new(fix(v.re), fix(v.im))
}

/// In-place `F[e] = Σ_x h[x] exp(2πi Σ_k e_k x_k / d_k)` on the mixed-radix layout.
pub(crate) fn group_dft(data: &mut [Complex64], orders: &[u64], planner: &mut FftPlanner<f64>) {
    let total = data.len();
    let mut stride = 1usize;
    for &d in orders {
        let d = d as usize;
        if d > 1 {
            let fft = planner.plan_fft_inverse(d);
            let mut line = vec![Complex64::new(0.0, 0.0); d];
            let block = stride * d;
            for base in (0..total).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[start + k * stride];
                    }
                    fft.process(&mut line);
                    for (k, v) in line.iter().enumerate() {
                        data[start + k * stride] = *v;
                    }
                }
            }
        }
        stride *= d;
    }
}

fn build_ldata(chi: &Character, coeffs: Vec<Complex64>, q: u64) -> Result<LData> {
    let principal = chi.is_principal();
    let trivial_factor = chi.even && !principal;
    let zeros = if principal { Vec::new() } else { classify_zeros(&coeffs, q, trivial_factor)? };
    Ok(LData { character: chi.index, coeffs, zeros, trivial_factor, principal })
}

/// Finds and classifies the inverse zeros of `ℒ(u) = Σ c_n u^n`.
pub fn classify_zeros(coeffs: &[Complex64], q: u64, even: bool) -> Result<Vec<InverseZero>> {
    let sqrt_q = (q as f64).sqrt();
    // Inverse zeros are the roots of the reversed polynomial, whose descending coefficients are c_0..c_d.
    let roots = find_roots(coeffs, sqrt_q)?;
    let mut out = Vec::new();
    let mut trivial_left = even;
    for Root { z, multiplicity } in roots {
        let r = z.norm();
        let kind = if (r - sqrt_q).abs() <= CLASSIFY_TOL * sqrt_q {
            ZeroKind::SqrtQ
        } else if (r - 1.0).abs() <= CLASSIFY_TOL {
            ZeroKind::Unit
        } else {
            return Err(Error::Numerical(format!("inverse zero {z} has modulus {r}, neither 1 nor √q")));
        };
        if kind == ZeroKind::Unit && trivial_left && (z - 1.0).norm() <= CLASSIFY_TOL {
            trivial_left = false;
            out.push(InverseZero { gamma: Complex64::new(1.0, 0.0), theta: 0.0, kind: ZeroKind::Trivial, multiplicity: 1 });
            if multiplicity > 1 {
                out.push(InverseZero { gamma: z, theta: z.arg(), kind, multiplicity: multiplicity - 1 });
            }
            continue;
        }
        out.push(InverseZero { gamma: z, theta: z.arg(), kind, multiplicity });
    }
    if trivial_left {
        return Err(Error::Numerical("even character without the zero γ = 1".into()));
    }
    out.sort_by(|a, b| a.theta.total_cmp(&b.theta).then(a.gamma.norm().total_cmp(&b.gamma.norm())));
    Ok(out)
}

/// Convenience constructor from a modulus polynomial.
pub fn ltable_for(m: &Poly) -> Result<LTable> {
    let modulus = crate::unitgroup::Modulus::new(m)?;
    let group = CharacterGroup::new(Arc::new(modulus))?;
    LTable::new(Arc::new(group))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::Field;

    fn table(s: &str) -> LTable {
        ltable_for(&Field::new(3).unwrap().parse(s).unwrap()).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-9
    }

    #[test]
    fn first_example_polynomials() {
        let t = table("T^2+T+1");
        let s3 = 3f64.sqrt();
        let mut linear: Vec<Complex64> = t.nonprincipal().map(|l| l.coeffs.get(1).copied().unwrap_or_default()).collect();
        linear.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        let want = [Complex64::new(0.0, -s3), Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, s3)];
        for (a, b) in linear.iter().zip(want) {
            assert!(close(*a, b), "{a} vs {b}");
        }
    }

    #[test]
    fn third_example_even_factor() {
        let t = table("T^3+2*T");
        for l in t.nonprincipal() {
            assert_eq!(l.degree(), 2);
            assert!(close(l.coeffs[1], Complex64::new(0.0, 0.0)));
            let c2 = l.coeffs[2];
            assert!(close(c2, Complex64::new(3.0, 0.0)) || close(c2, Complex64::new(-1.0, 0.0)));
        }
    }

    #[test]
    fn i_chi_and_log_derivative() {
        let t = table("T^3+2*T");
        let l = t.nonprincipal().find(|l| close(l.coeffs[2], Complex64::new(3.0, 0.0))).unwrap();
        assert!((l.i_chi() - 0.75).abs() < 1e-12);
        let ld = l.log_deriv_at_one(3);
        assert!((ld.re + 3f64.ln() / 2.0).abs() < 1e-12 && ld.im.abs() < 1e-12);
        assert!((t.i_chi_exact_formula(l.character).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn psi_matches_enumeration() {
        let t = table("T^2+T+1");
        for index in 0..6 {
            for n in 1..=4 {
                let a = t.psi_power_sum(index, n);
                let b = t.psi_brute_force(index, n);
                assert!((a - b).norm() < 1e-9, "χ{index} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn principal_psi_mod_t() {
        let t = table("T");
        assert!(close(t.psi_power_sum(0, 1), Complex64::new(2.0, 0.0)));
    }

    #[test]
    fn division_by_imprimitive_factor() {
        let one = Complex64::new(1.0, 0.0);
        // (1 − u)(1 + 3u²) / (1 − u)
        let num = [one, -one, one * 3.0, -one * 3.0];
        let q = divide_unit_constant(&num, &[one, -one]).unwrap();
        assert!(close(q[0], one) && close(q[1], Complex64::new(0.0, 0.0)) && close(q[2], one * 3.0));
        assert!(divide_unit_constant(&num, &[one, one]).is_err());
    }
}
