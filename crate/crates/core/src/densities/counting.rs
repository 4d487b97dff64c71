//! Exact prime counts in residue classes and the normalised race trajectory
//! `E_a(X) = (X / q^{X/2}) Σ_{N ≤ X} (φ(m) π_q(a, m, N) − π_q(N))`.
//!
//! The spectral engine works in the integer group ring `ℤ[G]`, `G = (𝔽_q[T]/m)*`.
//! With `A_n` the class histogram of coprime monics of degree `n`, the identity
//! `Σ A_n uⁿ = exp(Σ Ψ_n uⁿ / n)` gives `Ψ_n = n A_n − Σ_{k<n} Ψ_k A_{n−k}`, and
//! `Ψ_n = Σ_{d|n} d · F_{n/d}(h_d)` with `F_k : [g] ↦ [g^k]` recovers the prime histograms
//! `h_d`. For `n ≥ deg m`, `A_n = q^{n−deg m}` on every class, so only `deg m` full
//! convolutions are needed per step.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::periodic::{Parity, PeriodicSpectrum};
use crate::bias::SpectrumBundle;
use crate::error::{Error, Result};
use crate::ffpoly::{list_irreducibles, Poly};
use crate::numeric::{divisors, mobius};
use crate::unitgroup::{Modulus, ResidueClass};

/// Largest degree the sieve engine accepts at `q = 3`; scaled by `log q` for other fields.
pub const SIEVE_CAP_Q3: usize = 14;

/// Largest `X` the spectral engine accepts.
pub const SPECTRAL_CAP: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountEngine {
    Sieve,
    Spectral,
}

/// Largest sieve degree for a given `q`: `q^N ≤ 3^14`.
pub fn sieve_cap(q: u64) -> usize {
    let budget = 3f64.powi(SIEVE_CAP_Q3 as i32).ln();
    (budget / (q as f64).ln()).floor() as usize
}

/// `π_q(N)` by Möbius inversion of `Σ_{d|N} d π_q(d) = q^N`, exact for any `N`.
pub fn pi_q_mobius(q: u64, n: usize) -> BigInt {
    let mut total = BigInt::zero();
    for d in divisors(n as u64) {
        let mu = mobius(d);
        if mu != 0 {
            let term = BigInt::from(q).pow((n as u64 / d) as u32);
            if mu > 0 {
                total += term;
            } else {
                total -= term;
            }
        }
    }
    total / BigInt::from(n)
}

/// `π_q(a, m, N)` for every unit class (indexed by flat exponent) by filtering the sieve.
pub fn sieve_histogram(modulus: &Modulus, n: usize) -> Result<Vec<u64>> {
    let cap = sieve_cap(modulus.q());
    if n > cap {
        return Err(Error::DegreeCap { degree: n, cap });
    }
    let mut hist = vec![0u64; modulus.phi() as usize];
    for p in list_irreducibles(modulus.field(), n) {
        if let Some(c) = modulus.try_class(&p) {
            hist[c.flat() as usize] += 1;
        }
    }
    Ok(hist)
}

/// Monic primes of degree `n` dividing `m`.
pub fn dividing_primes(modulus: &Modulus, n: usize) -> u64 {
    modulus.factorization().primes().filter(|p| p.deg() == n).count() as u64
}

/// Exact prime histograms `h_1, …, h_X` in `ℤ[G]`.
#[derive(Clone, Debug)]
pub struct SpectralCounter {
    modulus: Modulus,
    /// `h[n-1][flat] = π_q(a, m, n)`
    h: Vec<Vec<BigInt>>,
}

impl SpectralCounter {
    pub fn new(modulus: &Modulus, x_max: usize) -> Result<Self> {
        if x_max > SPECTRAL_CAP {
            return Err(Error::DegreeCap { degree: x_max, cap: SPECTRAL_CAP });
        }
        let phi = modulus.phi() as usize;
        let big_m = modulus.degree();
        let q = BigInt::from(modulus.q());

        // A_n for n < deg m: the monics of degree n are their own residues.
        let mut small: Vec<Vec<BigInt>> = Vec::with_capacity(big_m);
        let mut qn = 1usize;
        for n in 0..big_m {
            let mut a = vec![BigInt::zero(); phi];
            if n == 0 {
                a[0] = BigInt::one();
            } else {
                qn *= modulus.q() as usize;
                for idx in qn..2 * qn {
                    if let Some(f) = modulus.flat_of_index(idx) {
                        a[f as usize] += 1;
                    }
                }
            }
            small.push(a);
        }
        let a_scalar = |n: usize| -> BigInt { q.pow((n - big_m) as u32) };

        let mut psi: Vec<Vec<BigInt>> = Vec::with_capacity(x_max);
        let mut psi_sum: Vec<BigInt> = Vec::with_capacity(x_max);
        let mut h: Vec<Vec<BigInt>> = Vec::with_capacity(x_max);
        for n in 1..=x_max {
            let mut cur: Vec<BigInt> = if n < big_m {
                small[n].iter().map(|v| v * n).collect()
            } else {
                vec![a_scalar(n) * n; phi]
            };
            let mut flat_part = BigInt::zero();
            for k in 1..n {
                let j = n - k;
                if j < big_m {
                    convolve_sub(modulus, &mut cur, &psi[k - 1], &small[j]);
                } else {
                    flat_part += &psi_sum[k - 1] * a_scalar(j);
                }
            }
            if !flat_part.is_zero() {
                for v in cur.iter_mut() {
                    *v -= &flat_part;
                }
            }
            // Ψ_n = Σ_{d|n} d F_{n/d}(h_d); peel off the proper divisors.
            let mut prime_part = cur.clone();
            for d in divisors(n as u64) {
                let d = d as usize;
                if d == n {
                    continue;
                }
                let k = (n / d) as i64;
                for (g, v) in h[d - 1].iter().enumerate() {
                    if !v.is_zero() {
                        let target = modulus.pow_flat(g as u32, k) as usize;
                        prime_part[target] -= v * d;
                    }
                }
            }
            let hn: Vec<BigInt> = prime_part
                .into_iter()
                .map(|v| {
                    let (quot, rem) = (&v / n, &v % n);
                    if !rem.is_zero() || quot.is_negative() {
                        Err(Error::Internal(format!("spectral count is not a non-negative integer at degree {n}")))
                    } else {
                        Ok(quot)
                    }
                })
                .collect::<Result<_>>()?;
            psi_sum.push(cur.iter().sum());
            psi.push(cur);
            h.push(hn);
        }
        Ok(SpectralCounter { modulus: modulus.clone(), h })
    }

    pub fn x_max(&self) -> usize {
        self.h.len()
    }

    /// `π_q(a, m, n)`.
    pub fn count(&self, a: &ResidueClass, n: usize) -> Result<&BigInt> {
        if n == 0 || n > self.h.len() {
            return Err(Error::Precondition(format!("degree {n} outside 1..={}", self.h.len())));
        }
        Ok(&self.h[n - 1][a.flat() as usize])
    }

    /// All classes at degree `n`, indexed by flat exponent.
    pub fn histogram(&self, n: usize) -> &[BigInt] {
        &self.h[n - 1]
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }
}

/// `out −= x * y` in `ℤ[G]`.
fn convolve_sub(modulus: &Modulus, out: &mut [BigInt], x: &[BigInt], y: &[BigInt]) {
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            if !yj.is_zero() {
                out[modulus.mul_flat(i as u32, j as u32) as usize] -= xi * yj;
            }
        }
    }
}

/// `π_q(a, m, N)` by the chosen engine.
pub fn count_primes_in_class(modulus: &Modulus, a: &Poly, n: usize, engine: CountEngine) -> Result<BigInt> {
    let class = modulus.class(a)?;
    if n == 0 {
        return Ok(BigInt::zero());
    }
    match engine {
        CountEngine::Sieve => Ok(sieve_histogram(modulus, n)?[class.flat() as usize].into()),
        CountEngine::Spectral => Ok(SpectralCounter::new(modulus, n)?.count(&class, n)?.clone()),
    }
}

/// `sign · exp(ln|s| − (x/2) ln q)` computed without overflowing `f64`.
fn scale_down(s: &BigInt, q: u64, x: usize) -> f64 {
    if s.is_zero() {
        return 0.0;
    }
    let bits = s.bits();
    let shift = bits.saturating_sub(60);
    let mant = (s.abs() >> shift).to_f64().unwrap_or(f64::MAX);
    let ln = mant.ln() + shift as f64 * std::f64::consts::LN_2 - 0.5 * x as f64 * (q as f64).ln();
    let v = ln.exp();
    if s.is_negative() {
        -v
    } else {
        v
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryPoint {
    pub x: usize,
    pub e: Vec<f64>,
    /// `rank[j]` is the position (0 = largest) of class `j`; equal sums share a rank.
    pub rank: Vec<usize>,
    /// `E_{a_1}(X) > … > E_{a_r}(X)` holds.
    pub ordered: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub classes: Vec<String>,
    pub points: Vec<TrajectoryPoint>,
    /// The set `P ∩ [1, X_max]` of `X` with the race in the given order.
    pub ordered_set: Vec<usize>,
}

impl Trajectory {
    pub fn ordered_fraction(&self) -> f64 {
        self.ordered_set.len() as f64 / self.points.len().max(1) as f64
    }
}

/// Exact `E`-vectors for `X = 1..=x_max`; the ordering is decided on the integer sums.
pub fn race_trajectory(modulus: &Modulus, classes: &[ResidueClass], x_max: usize) -> Result<Trajectory> {
    let counter = SpectralCounter::new(modulus, x_max)?;
    Ok(trajectory_from_counter(&counter, classes))
}

pub fn trajectory_from_counter(counter: &SpectralCounter, classes: &[ResidueClass]) -> Trajectory {
    let modulus = counter.modulus();
    let q = modulus.q();
    let phi = BigInt::from(modulus.phi());
    let r = classes.len();
    let mut sums = vec![BigInt::zero(); r];
    let mut points = Vec::with_capacity(counter.x_max());
    let mut ordered_set = Vec::new();
    for x in 1..=counter.x_max() {
        let pi_n = pi_q_mobius(q, x);
        for (s, a) in sums.iter_mut().zip(classes) {
            *s += &phi * &counter.histogram(x)[a.flat() as usize] - &pi_n;
        }
        let e: Vec<f64> = sums.iter().map(|s| x as f64 * scale_down(s, q, x)).collect();
        let rank: Vec<usize> = sums.iter().map(|s| sums.iter().filter(|t| *t > s).count()).collect();
        let ordered = sums.windows(2).all(|w| w[0] > w[1]);
        if ordered {
            ordered_set.push(x);
        }
        points.push(TrajectoryPoint { x, e, rank, ordered });
    }
    Trajectory { classes: classes.iter().map(|c| c.to_string()).collect(), points, ordered_set }
}

/// Result of matching the trajectory against both `𝓑_q` parity conventions.
#[derive(Clone, Debug, Serialize)]
pub struct ParityCalibration {
    pub window: (usize, usize),
    /// Largest `|E(X) − limit(X)|` over the window and all classes, with `q/(q−1)` at even `X`.
    pub deviation_even: f64,
    /// The same with `q/(q−1)` at odd `X`.
    pub deviation_odd: f64,
    pub chosen: Parity,
    /// True when the default convention (even) had to be flipped.
    pub flipped: bool,
}

/// Compares the exact trajectory on `[lo, hi]` with the periodic limit under both parities.
pub fn calibrate_parity(
    spectrum: &SpectrumBundle,
    trajectory: &Trajectory,
    classes: &[ResidueClass],
    window: (usize, usize),
) -> Result<ParityCalibration> {
    let dev = |parity| -> Result<f64> {
        let p = PeriodicSpectrum::with_parity(spectrum, parity)?;
        let mut worst: f64 = 0.0;
        for pt in trajectory.points.iter().filter(|p| p.x >= window.0 && p.x <= window.1) {
            for (a, e) in classes.iter().zip(&pt.e) {
                worst = worst.max((e - p.limit(a, pt.x as u64)).abs());
            }
        }
        Ok(worst)
    };
    let deviation_even = dev(Parity::Even)?;
    let deviation_odd = dev(Parity::Odd)?;
    let chosen = if deviation_odd < deviation_even { Parity::Odd } else { Parity::Even };
    Ok(ParityCalibration { window, deviation_even, deviation_odd, chosen, flipped: chosen != Parity::Even })
}
