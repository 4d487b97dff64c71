//! Sampling the limiting random vector
//! `X_a = −C_m(a) X′ + Σ_χ Σ_{Im γ>0} 2 Re(χ(a) U_γ) |γ/(γ−1)|`
//! and its Fourier transform.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bessel::j0;
use crate::bias::SpectrumBundle;
use crate::error::{Error, Result};
use crate::unitgroup::ResidueClass;

/// Default number of draws.
pub const DEFAULT_DRAWS: u64 = 1_000_000;

/// Minimum accepted number of draws.
pub const MIN_DRAWS: u64 = 10_000;

/// Draws per shard; each shard has its own ChaCha stream so results do not depend on
/// the number of worker threads.
pub const SHARD: u64 = 1 << 14;

/// Angles are drawn uniformly from the `2^16`-th roots of unity. Every moment of the
/// limiting vector below order `2^16` is then exactly that of a continuous uniform angle.
const TABLE_BITS: u32 = 16;

/// `(cos, sin)` at `2πk/2^16`.
fn table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..1usize << TABLE_BITS)
            .map(|k| {
                let a = TAU * k as f64 / (1u64 << TABLE_BITS) as f64;
                (a.cos(), a.sin())
            })
            .collect()
    })
}

/// Precomputed coefficients of the limiting vector for a fixed tuple of classes.
#[derive(Clone, Debug)]
pub struct LimitingSampler {
    r: usize,
    /// For each zero copy: `2|γ/(γ−1)|·χ(a_j)` as `(re, im)` for `j = 0..r`.
    coeffs: Vec<f64>,
    copies: usize,
    c: Vec<f64>,
    x_values: [f64; 2],
}

impl LimitingSampler {
    pub fn new(spectrum: &SpectrumBundle, classes: &[ResidueClass]) -> Result<Self> {
        if spectrum.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        let group = spectrum.group();
        let r = classes.len();
        let mut coeffs = Vec::new();
        let mut copies = 0;
        for z in spectrum.positive_zeros() {
            let chi = group.get(z.character);
            let row: Vec<Complex64> =
                classes.iter().map(|a| group.value(chi, a).to_complex() * (2.0 * z.amplitude)).collect();
            for _ in 0..z.multiplicity {
                for v in &row {
                    coeffs.push(v.re);
                    coeffs.push(v.im);
                }
                copies += 1;
            }
        }
        let q = spectrum.q() as f64;
        Ok(LimitingSampler {
            r,
            coeffs,
            copies,
            c: classes.iter().map(|a| spectrum.c_m(a) as f64).collect(),
            x_values: [q.sqrt() / (q - 1.0), q / (q - 1.0)],
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of independent angles per draw.
    pub fn zero_copies(&self) -> usize {
        self.copies
    }

    pub fn c_values(&self) -> &[f64] {
        &self.c
    }

    /// The oscillating part `S_j = Σ 2 Re(χ(a_j) U) |γ/(γ−1)|` of one draw.
    fn oscillating(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let table = table();
        out.fill(0.0);
        let r = self.r;
        let stride = 2 * r;
        let mut chunks = self.coeffs.chunks_exact(stride);
        let mut word = 0u64;
        let mut have = 0u32;
        for row in chunks.by_ref() {
            if have == 0 {
                word = rng.next_u64();
                have = 4;
            }
            let (ux, uy) = table[(word & 0xffff) as usize];
            word >>= 16;
            have -= 1;
            for j in 0..r {
                // Re((a + ib)(ux + i uy)) = a ux − b uy
                out[j] += row[2 * j] * ux - row[2 * j + 1] * uy;
            }
        }
    }

    fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard);
        rng
    }

    /// Runs `draws` draws split into fixed shards; `visit` sees the oscillating part and a
    /// random bit for `X′`, and accumulates into a per-shard state merged in shard order.
    fn run<S, F, M>(&self, draws: u64, seed: u64, init: impl Fn() -> S + Sync, visit: F, merge: M) -> S
    where
        S: Send,
        F: Fn(&mut S, &[f64], bool) + Sync,
        M: Fn(S, S) -> S,
    {
        let shards = draws.div_ceil(SHARD);
        let parts: Vec<S> = (0..shards)
            .into_par_iter()
            .map(|shard| {
                let mut rng = Self::shard_rng(seed, shard);
                let mut state = init();
                let mut s = vec![0.0; self.r];
                let n = SHARD.min(draws - shard * SHARD);
                for _ in 0..n {
                    self.oscillating(&mut rng, &mut s);
                    let bit = rng.next_u32() & 1 == 1;
                    visit(&mut state, &s, bit);
                }
                state
            })
            .collect();
        let mut it = parts.into_iter();
        let first = it.next().unwrap_or_else(&init);
        it.fold(first, merge)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
}

fn strictly_ordered(x: &[f64], order: &[usize]) -> bool {
    order.windows(2).all(|w| x[w[0]] > x[w[1]])
}

/// Estimates `P(X_{o₀} > X_{o₁} > …)` for each ordering `o` (a sequence of indices into
/// the sampler's classes), from shared draws.
///
/// Each draw averages the indicator over both values of `X′` and over `±S`, which is an
/// exact conditional expectation step and keeps the estimator unbiased.
pub fn density_monte_carlo(sampler: &LimitingSampler, orderings: &[Vec<usize>], draws: u64, seed: u64) -> Result<Vec<Estimate>> {
    if draws < MIN_DRAWS {
        return Err(Error::Precondition(format!("at least {MIN_DRAWS} draws are required, got {draws}")));
    }
    for o in orderings {
        if o.iter().any(|&i| i >= sampler.r) {
            return Err(Error::Precondition(format!("ordering {o:?} refers to a class outside the race")));
        }
    }
    let k = orderings.len();
    let r = sampler.r;
    let xv = sampler.x_values;
    let (sum, sum_sq) = sampler.run(
        draws,
        seed,
        || (vec![0.0; k], vec![0.0; k]),
        |(sum, sum_sq), s, _bit| {
            let mut x = [0.0f64; 8];
            let mut acc = [0.0f64; 64];
            let acc = &mut acc[..k.min(64)];
            let mut heap_acc;
            let acc: &mut [f64] = if k <= 64 {
                acc
            } else {
                heap_acc = vec![0.0; k];
                &mut heap_acc
            };
            for sign in [1.0, -1.0] {
                for xp in xv {
                    for j in 0..r {
                        x[j] = -sampler.c[j] * xp + sign * s[j];
                    }
                    for (a, o) in acc.iter_mut().zip(orderings) {
                        if strictly_ordered(&x[..r], o) {
                            *a += 0.25;
                        }
                    }
                }
            }
            for i in 0..k {
                sum[i] += acc[i];
                sum_sq[i] += acc[i] * acc[i];
            }
        },
        |(mut a, mut b), (c, d)| {
            for i in 0..k {
                a[i] += c[i];
                b[i] += d[i];
            }
            (a, b)
        },
    );
    let n = draws as f64;
    Ok((0..k)
        .map(|i| {
            let mean = sum[i] / n;
            let var = (sum_sq[i] / n - mean * mean).max(0.0);
            Estimate { estimate: mean, stderr: (var / n).sqrt() }
        })
        .collect())
}

/// Sample moments of plain draws of the limiting vector.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub draws: u64,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub covariance_stderr: Vec<Vec<f64>>,
    /// Empirical `E[exp(i t·X)]` at each probe, with standard errors of the real and imaginary parts.
    pub charfn: Vec<(Complex64, f64, f64)>,
}

/// Sample covariance and empirical characteristic function from `draws` draws.
///
/// The covariance uses the known zero mean of the oscillating part, so the entry
/// `(j, k)` is the average of `(X_j − μ_j)(X_k − μ_k)` with `μ_j = −C_j E[X′]`.
pub fn mc_moments(sampler: &LimitingSampler, draws: u64, seed: u64, probes: &[Vec<f64>]) -> Result<MomentReport> {
    if draws < MIN_DRAWS {
        return Err(Error::Precondition(format!("at least {MIN_DRAWS} draws are required, got {draws}")));
    }
    let r = sampler.r;
    if probes.iter().any(|t| t.len() != r) {
        return Err(Error::Precondition(format!("probe vectors must have length {r}")));
    }
    let mean_xp = (sampler.x_values[0] + sampler.x_values[1]) / 2.0;
    let mu: Vec<f64> = sampler.c.iter().map(|c| -c * mean_xp).collect();
    let p = probes.len();
    #[derive(Clone)]
    struct Acc {
        x: Vec<f64>,
        xx: Vec<f64>,
        xx2: Vec<f64>,
        cf: Vec<[f64; 4]>,
    }
    let init = || Acc { x: vec![0.0; r], xx: vec![0.0; r * r], xx2: vec![0.0; r * r], cf: vec![[0.0; 4]; p] };
    let acc = sampler.run(
        draws,
        seed,
        init,
        |acc, s, bit| {
            let xp = sampler.x_values[bit as usize];
            let mut x = [0.0f64; 8];
            for j in 0..r {
                x[j] = -sampler.c[j] * xp + s[j];
                acc.x[j] += x[j];
            }
            for j in 0..r {
                for k in 0..r {
                    let v = (x[j] - mu[j]) * (x[k] - mu[k]);
                    acc.xx[j * r + k] += v;
                    acc.xx2[j * r + k] += v * v;
                }
            }
            for (t, cf) in probes.iter().zip(acc.cf.iter_mut()) {
                let phase: f64 = t.iter().zip(&x[..r]).map(|(a, b)| a * b).sum();
                let (sn, cs) = phase.sin_cos();
                cf[0] += cs;
                cf[1] += cs * cs;
                cf[2] += sn;
                cf[3] += sn * sn;
            }
        },
        |mut a, b| {
            for (u, v) in a.x.iter_mut().zip(&b.x) {
                *u += v;
            }
            for (u, v) in a.xx.iter_mut().zip(&b.xx) {
                *u += v;
            }
            for (u, v) in a.xx2.iter_mut().zip(&b.xx2) {
                *u += v;
            }
            for (u, v) in a.cf.iter_mut().zip(&b.cf) {
                for i in 0..4 {
                    u[i] += v[i];
                }
            }
            a
        },
    );
    let n = draws as f64;
    let se = |s: f64, s2: f64| ((s2 / n - (s / n).powi(2)).max(0.0) / n).sqrt();
    Ok(MomentReport {
        draws,
        mean: acc.x.iter().map(|v| v / n).collect(),
        covariance: (0..r).map(|j| (0..r).map(|k| acc.xx[j * r + k] / n).collect()).collect(),
        covariance_stderr: (0..r).map(|j| (0..r).map(|k| se(acc.xx[j * r + k], acc.xx2[j * r + k])).collect()).collect(),
        charfn: acc
            .cf
            .iter()
            .map(|c| (Complex64::new(c[0] / n, c[2] / n), se(c[0], c[1]), se(c[2], c[3])))
            .collect(),
    })
}

/// `μ̂(t) = 𝓑(t) · Π_{χ, Im γ > 0} J₀(2|γ/(γ−1)| · |Σ_j χ(a_j) t_j|)`, with
/// `𝓑(t) = ½[exp(−i√q/(q−1) Σ C_j t_j) + exp(−i q/(q−1) Σ C_j t_j)]`, the transform of
/// the `−C X′` component.
pub fn mu_hat(spectrum: &SpectrumBundle, classes: &[ResidueClass], t: &[f64]) -> Result<Complex64> {
    if t.len() != classes.len() {
        return Err(Error::Precondition("t must have one entry per class".into()));
    }
    let q = spectrum.q() as f64;
    let ct: f64 = classes.iter().zip(t).map(|(a, tj)| spectrum.c_m(a) as f64 * tj).sum();
    let b = (Complex64::from_polar(1.0, -q.sqrt() / (q - 1.0) * ct) + Complex64::from_polar(1.0, -q / (q - 1.0) * ct)) * 0.5;
    let group = spectrum.group();
    let mut prod = 1.0;
    for z in spectrum.positive_zeros() {
        let chi = group.get(z.character);
        let s: Complex64 = classes.iter().zip(t).map(|(a, tj)| group.value(chi, a).to_complex() * *tj).sum();
        prod *= j0(2.0 * z.amplitude * s.norm()).powi(z.multiplicity as i32);
    }
    Ok(b * prod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::Field;

    #[test]
    fn angle_table_is_on_the_circle() {
        let t = table();
        assert_eq!(t.len(), 1 << 16);
        assert_eq!(t[0], (1.0, 0.0));
        assert!((t[1 << 14].0).abs() < 1e-15 && (t[1 << 14].1 - 1.0).abs() < 1e-15);
        assert!(t.iter().all(|(c, s)| (c * c + s * s - 1.0).abs() < 1e-15));
    }

    fn setup() -> (SpectrumBundle, Vec<ResidueClass>) {
        let f = Field::new(3).unwrap();
        let s = SpectrumBundle::for_modulus(&f.parse("T^4+T+2").unwrap()).unwrap();
        let classes = ["1", "T", "T+1"].iter().map(|c| s.modulus().class(&f.parse(c).unwrap()).unwrap()).collect();
        (s, classes)
    }

    #[test]
    fn permutations_sum_to_one() {
        let (s, classes) = setup();
        let sampler = LimitingSampler::new(&s, &classes).unwrap();
        let perms = vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]];
        let est = density_monte_carlo(&sampler, &perms, 20_000, 3).unwrap();
        let total: f64 = est.iter().map(|e| e.estimate).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let again = density_monte_carlo(&sampler, &perms, 20_000, 3).unwrap();
        assert_eq!(est[0].estimate, again[0].estimate);
    }

    #[test]
    fn mu_hat_basics() {
        let (s, classes) = setup();
        assert_eq!(mu_hat(&s, &classes, &[0.0, 0.0, 0.0]).unwrap(), Complex64::new(1.0, 0.0));
        let t = [0.3, -0.2, 0.5];
        let a = mu_hat(&s, &classes, &t).unwrap();
        let b = mu_hat(&s, &classes, &[-0.3, 0.2, -0.5]).unwrap();
        assert!((a - b.conj()).norm() < 1e-15);
        assert!(a.norm() <= 1.0);
    }

    #[test]
    fn covariance_and_charfn_agree_with_theory() {
        let (s, classes) = setup();
        let sampler = LimitingSampler::new(&s, &classes).unwrap();
        let t = vec![0.2, -0.1, 0.15];
        let rep = mc_moments(&sampler, 200_000, 11, std::slice::from_ref(&t)).unwrap();
        let cov = s.covariance_matrix(&classes).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let z = (rep.covariance[j][k] - cov[(j, k)]) / rep.covariance_stderr[j][k];
                assert!(z.abs() < 5.0, "cov[{j}][{k}] z = {z}");
            }
        }
        let want = mu_hat(&s, &classes, &t).unwrap();
        let (got, se_re, se_im) = rep.charfn[0];
        assert!((got.re - want.re).abs() < 5.0 * se_re && (got.im - want.im).abs() < 5.0 * se_im);
    }

    #[test]
    fn empty_spectrum_is_an_error() {
        let f = Field::new(3).unwrap();
        let s = SpectrumBundle::for_modulus(&f.parse("T+1").unwrap()).unwrap();
        let classes = vec![s.modulus().one()];
        assert!(matches!(LimitingSampler::new(&s, &classes), Err(Error::EmptySpectrum)));
    }
}
