//! Race densities: asymptotic main terms, Monte Carlo on the limiting distribution,
//! exact periodic evaluation, and exact prime counts.

mod asymptotic;
mod bessel;
mod counting;
mod gaussian;
mod montecarlo;
mod periodic;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use asymptotic::{
    density_asymptotic, density_asymptotic_r2, density_asymptotic_r3plus, AsymptoticDensity, AsymptoticMode,
    AsymptoticTerms,
};
pub use bessel::j0;
pub use counting::{
    calibrate_parity, count_primes_in_class, dividing_primes, pi_q_mobius, race_trajectory, sieve_cap,
    sieve_histogram, trajectory_from_counter, CountEngine, ParityCalibration, SpectralCounter, Trajectory,
    TrajectoryPoint, SPECTRAL_CAP,
};
pub use gaussian::{
    closed_form, monte_carlo_constants, ordered_gaussian_constants, ConstantsMethod, OrderedGaussianConstants,
    GAUSSIAN_SEED, TARGET_STDERR,
};
pub use montecarlo::{
    density_monte_carlo, mc_moments, mu_hat, Estimate, LimitingSampler, MomentReport, DEFAULT_DRAWS, MIN_DRAWS, SHARD,
};
pub use periodic::{
    density_exact_periodic, rational_approx, LimitTable, Parity, PeriodicDensity, PeriodicSpectrum, PeriodicTerm,
    TieReport, MAX_ANGLE_DENOMINATOR, MAX_PERIOD, TIE_TOL,
};

use crate::bias::SpectrumBundle;
use crate::error::{Error, Result};
use crate::unitgroup::ResidueClass;

/// Exhaustive search limit on the number of ordered tuples.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

/// Tuples drawn when the exhaustive search is too large.
pub const SAMPLED_TUPLES: usize = 2_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "engine")]
pub enum DensityEngine {
    Periodic,
    Asymptotic,
    MonteCarlo { draws: u64, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaExtremes {
    pub r: usize,
    pub delta: f64,
    /// Tuples attaining the maximum.
    pub witnesses: Vec<(Vec<String>, f64)>,
    pub tuples_examined: u64,
    pub exhaustive: bool,
}

/// `Δ_r(m) = max |δ(a_1, …, a_r) − 1/r!|` over tuples of distinct units.
pub fn delta_extremes(spectrum: &SpectrumBundle, r: usize, engine: DensityEngine, seed: u64) -> Result<DeltaExtremes> {
    let modulus = spectrum.modulus();
    let phi = modulus.phi();
    if r < 2 || r as u64 > phi {
        return Err(Error::Precondition(format!("need 2 ≤ r ≤ φ(m) = {phi}, got {r}")));
    }
    let units: Vec<ResidueClass> = modulus.units().collect();
    let total = (0..r as u64).try_fold(1u64, |acc, i| acc.checked_mul(phi - i));
    let exhaustive = total.is_some_and(|t| t <= EXHAUSTIVE_LIMIT);
    let tuples: Vec<Vec<usize>> = if exhaustive {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(r);
        ordered_tuples(units.len(), r, &mut cur, &mut out);
        out
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx: Vec<usize> = (0..units.len()).collect();
        (0..SAMPLED_TUPLES).map(|_| idx.choose_multiple(&mut rng, r).copied().collect()).collect()
    };

    let baseline = 1.0 / (1..=r).map(|k| k as f64).product::<f64>();
    let periodic = match engine {
        DensityEngine::Periodic => Some(PeriodicSpectrum::new(spectrum)?),
        _ => None,
    };
    let constants = match engine {
        DensityEngine::Asymptotic if r >= 3 => Some(ordered_gaussian_constants(r)?),
        _ => None,
    };
    let mut best = -1.0f64;
    let mut witnesses = Vec::new();
    for t in &tuples {
        let classes: Vec<ResidueClass> = t.iter().map(|&i| units[i].clone()).collect();
        let d = match engine {
            DensityEngine::Periodic => periodic.as_ref().expect("built above").density(&classes)?.estimate,
            DensityEngine::Asymptotic => {
                let report = spectrum.race_report(&classes)?;
                match &constants {
                    Some(c) => density_asymptotic_r3plus(&report, modulus.q(), c, AsymptoticMode::Full)?.estimate,
                    None => {
                        density_asymptotic_r2(&report, modulus.q(), phi, modulus.cm(&modulus.one()), modulus.degree())?
                            .estimate
                    }
                }
            }
            DensityEngine::MonteCarlo { draws, seed } => {
                let sampler = LimitingSampler::new(spectrum, &classes)?;
                density_monte_carlo(&sampler, &[(0..r).collect()], draws, seed)?[0].estimate
            }
        };
        let dev = (d - baseline).abs();
        let names = classes.iter().map(|c| c.to_string()).collect();
        if dev > best + 1e-12 {
            best = dev;
            witnesses = vec![(names, d)];
        } else if (dev - best).abs() <= 1e-12 {
            witnesses.push((names, d));
        }
    }
    Ok(DeltaExtremes { r, delta: best.max(0.0), witnesses, tuples_examined: tuples.len() as u64, exhaustive })
}

fn ordered_tuples(n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == r {
        out.push(cur.clone());
        return;
    }
    for i in 0..n {
        if !cur.contains(&i) {
            cur.push(i);
            ordered_tuples(n, r, cur, out);
            cur.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffpoly::Field;

    #[test]
    fn delta_two_on_first_example() {
        let f = Field::new(3).unwrap();
        let s = SpectrumBundle::for_modulus(&f.parse("T^2+T+1").unwrap()).unwrap();
        let d = delta_extremes(&s, 2, DensityEngine::Periodic, 0).unwrap();
        assert!(d.exhaustive);
        assert_eq!(d.tuples_examined, 30);
        assert_eq!(d.delta, 0.5);
        assert!(d.witnesses.iter().any(|(w, v)| w == &vec!["T+1".to_string(), "T".to_string()] && *v == 1.0));
    }
}
