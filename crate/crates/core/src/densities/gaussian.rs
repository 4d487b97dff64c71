//! The constants `α_j(r)`, `λ_j(r)`, `β_{j,k}(r)`: integrals of `x_j`, `x_j² − 1` and
//! `x_j x_k` against the standard Gaussian over the cone `x₁ > … > x_r`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// Fixed seed for the Monte Carlo constants so repeated runs agree bit for bit.
pub const GAUSSIAN_SEED: u64 = 0x0a1f_a5e7;

/// Target standard error for Monte Carlo constants.
pub const TARGET_STDERR: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsMethod {
    ClosedForm,
    MonteCarlo,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderedGaussianConstants {
    pub r: usize,
    pub alpha: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `beta[j][k]` for `j < k`; other entries are zero.
    pub beta: Vec<Vec<f64>>,
    pub method: ConstantsMethod,
    /// Largest standard error across all entries (Monte Carlo only).
    pub stderr: Option<f64>,
    pub draws: Option<u64>,
}

impl OrderedGaussianConstants {
    pub fn beta(&self, j: usize, k: usize) -> f64 {
        if j < k {
            self.beta[j][k]
        } else {
            self.beta[k][j]
        }
    }

    pub fn sum_alpha(&self) -> f64 {
        self.alpha.iter().sum()
    }

    pub fn sum_lambda(&self) -> f64 {
        self.lambda.iter().sum()
    }

    pub fn sum_beta(&self) -> f64 {
        (0..self.r).flat_map(|j| (j + 1..self.r).map(move |k| (j, k))).map(|(j, k)| self.beta[j][k]).sum()
    }
}

/// Closed forms for `r ≤ 3`, Monte Carlo with a fixed seed for `4 ≤ r ≤ 6`.
pub fn ordered_gaussian_constants(r: usize) -> Result<OrderedGaussianConstants> {
    match r {
        2 | 3 => Ok(closed_form(r)),
        4..=6 => monte_carlo_constants(r, GAUSSIAN_SEED, TARGET_STDERR),
        _ => Err(Error::Precondition(format!("ordered Gaussian constants need 2 ≤ r ≤ 6, got {r}"))),
    }
}

pub fn closed_form(r: usize) -> OrderedGaussianConstants {
    let sp = PI.sqrt();
    let (alpha, lambda, beta) = match r {
        2 => (vec![1.0 / (2.0 * sp), -1.0 / (2.0 * sp)], vec![0.0, 0.0], vec![vec![0.0, 0.0], vec![0.0, 0.0]]),
        3 => {
            let s3 = 3f64.sqrt();
            let b = 1.0 / (4.0 * PI * s3);
            (
                vec![1.0 / (4.0 * sp), 0.0, -1.0 / (4.0 * sp)],
                vec![s3 / (12.0 * PI), -s3 / (6.0 * PI), s3 / (12.0 * PI)],
                vec![vec![0.0, b, -2.0 * b], vec![0.0, 0.0, b], vec![0.0, 0.0, 0.0]],
            )
        }
        _ => unreachable!("closed forms exist for r ≤ 3"),
    };
    OrderedGaussianConstants { r, alpha, lambda, beta, method: ConstantsMethod::ClosedForm, stderr: None, draws: None }
}

/// Estimates the constants from sorted standard normal samples.
///
/// Each statistic is centred by a symmetric function with known mean (`Σx/r`, `Σx²/r`,
/// `Σ_{a<b} x_a x_b / C(r,2)`), which leaves the expectation unchanged and makes the
/// zero-sum identities hold sample by sample.
pub fn monte_carlo_constants(r: usize, seed: u64, target: f64) -> Result<OrderedGaussianConstants> {
    if !(2..=6).contains(&r) {
        return Err(Error::Precondition(format!("ordered Gaussian constants need 2 ≤ r ≤ 6, got {r}")));
    }
    let fact: f64 = (1..=r).map(|k| k as f64).product();
    let pairs = r * (r - 1) / 2;
    let stats = r + r + pairs;
    let mut sum = vec![0.0; stats];
    let mut sum_sq = vec![0.0; stats];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0f64; r];
    let mut v = vec![0.0f64; stats];
    let mut n: u64 = 0;
    let batch: u64 = 1 << 18;
    loop {
        for _ in 0..batch {
            for xi in x.iter_mut() {
                *xi = rng.sample(StandardNormal);
            }
            x.sort_by(|a, b| b.total_cmp(a));
            let s1: f64 = x.iter().sum();
            let s2: f64 = x.iter().map(|a| a * a).sum();
            let cross = (s1 * s1 - s2) / 2.0;
            for j in 0..r {
                v[j] = x[j] - s1 / r as f64;
                v[r + j] = x[j] * x[j] - s2 / r as f64;
            }
            let mut p = 2 * r;
            for j in 0..r {
                for k in j + 1..r {
                    v[p] = x[j] * x[k] - cross / pairs as f64;
                    p += 1;
                }
            }
            for (i, &val) in v.iter().enumerate() {
                sum[i] += val;
                sum_sq[i] += val * val;
            }
        }
        n += batch;
        let worst = (0..stats)
            .map(|i| {
                let mean = sum[i] / n as f64;
                ((sum_sq[i] / n as f64 - mean * mean).max(0.0) / n as f64).sqrt() / fact
            })
            .fold(0.0, f64::max);
        if worst <= target || n >= 1 << 26 {
            let mean = |i: usize| sum[i] / n as f64 / fact;
            let alpha = (0..r).map(mean).collect();
            let lambda = (0..r).map(|j| mean(r + j)).collect();
            let mut beta = vec![vec![0.0; r]; r];
            let mut p = 2 * r;
            for (j, row) in beta.iter_mut().enumerate() {
                for entry in row.iter_mut().skip(j + 1) {
                    *entry = mean(p);
                    p += 1;
                }
            }
            return Ok(OrderedGaussianConstants {
                r,
                alpha,
                lambda,
                beta,
                method: ConstantsMethod::MonteCarlo,
                stderr: Some(worst),
                draws: Some(n),
            });
        }
    }
}
