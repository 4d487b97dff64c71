//! End-to-end checks across modules against brute-force oracles.

mod common;

use num_bigint::BigInt;

use common::{poly, CORPUS};
use ffrace::bias::SpectrumBundle;
use ffrace::densities::{
    count_primes_in_class, density_exact_periodic, dividing_primes, pi_q_mobius, sieve_histogram, CountEngine,
    SpectralCounter,
};
use ffrace::ffpoly::{count_irreducibles, list_irreducibles};
use ffrace::lfunctions::{ltable_for, ZeroKind};
use ffrace::{Field, Modulus};

/// Small moduli from the corpus, cheap enough for brute force.
fn small_corpus() -> impl Iterator<Item = (u64, &'static str)> {
    CORPUS.iter().copied().filter(|(q, m)| poly(*q, m).deg() <= if *q == 3 { 5 } else { 3 })
}

#[test]
fn zeros_reproduce_prime_power_sums() {
    for (q, m) in small_corpus() {
        let table = ltable_for(&poly(q, m)).unwrap();
        for l in table.nonprincipal() {
            for n in 1..=4 {
                let from_zeros = table.psi_power_sum(l.character, n);
                let brute = table.psi_brute_force(l.character, n);
                assert!((from_zeros - brute).norm() < 1e-8, "{m} over F_{q}, chi {}, n = {n}", l.character);
            }
        }
    }
}

#[test]
fn zero_counts_and_moduli() {
    let sq = |q: u64| (q as f64).sqrt();
    for (q, m) in small_corpus() {
        let table = ltable_for(&poly(q, m)).unwrap();
        for l in table.nonprincipal() {
            assert_eq!(l.zero_count(), l.degree(), "{m}: chi {}", l.character);
            for z in &l.zeros {
                let r = z.gamma.norm();
                let want = match z.kind {
                    ZeroKind::SqrtQ => sq(q),
                    ZeroKind::Unit | ZeroKind::Trivial => 1.0,
                };
                assert!((r - want).abs() < 1e-9, "{m}: |γ| = {r}");
            }
        }
    }
}

#[test]
fn prime_counts_partition_by_class() {
    for (q, m) in small_corpus().filter(|(q, _)| *q == 3) {
        let modulus = Modulus::new(&poly(q, m)).unwrap();
        for n in 1..=8 {
            let hist = sieve_histogram(&modulus, n).unwrap();
            let total: u64 = hist.iter().sum::<u64>() + dividing_primes(&modulus, n);
            assert_eq!(BigInt::from(total), pi_q_mobius(q, n), "{m}, n = {n}");
            assert_eq!(BigInt::from(count_irreducibles(Field::new(q).unwrap(), n)), pi_q_mobius(q, n));
        }
    }
}

#[test]
fn counting_engines_agree_with_enumeration() {
    let f = Field::new(3).unwrap();
    let modulus = Modulus::new(&f.parse("T^3+2*T").unwrap()).unwrap();
    let counter = SpectralCounter::new(&modulus, 9).unwrap();
    for n in 1..=9 {
        let mut by_class = vec![0u64; modulus.phi() as usize];
        for p in list_irreducibles(f, n) {
            if let Some(c) = modulus.try_class(&p) {
                by_class[c.flat() as usize] += 1;
            }
        }
        for a in modulus.units() {
            let want = BigInt::from(by_class[a.flat() as usize]);
            assert_eq!(counter.count(&a, n).unwrap(), &want, "n = {n}, class {a}");
            assert_eq!(count_primes_in_class(&modulus, a.rep(), n, CountEngine::Sieve).unwrap(), want);
        }
    }
}

#[test]
fn principal_character_has_no_sqrt_q_zeros() {
    for (q, m) in small_corpus() {
        let table = ltable_for(&poly(q, m)).unwrap();
        assert!(table.get(0).principal);
        assert_eq!(table.get(0).sqrt_q_zeros().count(), 0);
    }
}

#[test]
fn n_m_is_twice_the_sum_of_i_chi() {
    for (q, m) in small_corpus() {
        let table = ltable_for(&poly(q, m)).unwrap();
        let spectrum = SpectrumBundle::new(&table);
        let direct: f64 = table.nonprincipal().map(|l| l.i_chi()).sum::<f64>() * 2.0;
        let real: f64 = spectrum.real_zeros().iter().map(|z| z.weight() * z.multiplicity as f64).sum();
        assert!((spectrum.n_m() + real - direct).abs() < 1e-8, "{m} over F_{q}");
    }
}

#[test]
fn two_way_periodic_densities_are_complementary() {
    let f = Field::new(3).unwrap();
    let spectrum = SpectrumBundle::for_modulus(&f.parse("T^2+T+1").unwrap()).unwrap();
    let m = spectrum.modulus();
    let units: Vec<_> = m.units().collect();
    for a in &units {
        for b in &units {
            if a == b {
                continue;
            }
            let ab = density_exact_periodic(&spectrum, &[a.clone(), b.clone()]).unwrap();
            let ba = density_exact_periodic(&spectrum, &[b.clone(), a.clone()]).unwrap();
            let one = ffrace::Rational::from_integer(1.into());
            if ab.ties.tied_residues.is_empty() {
                assert_eq!(&ab.density + &ba.density, one, "{a} vs {b}");
            } else {
                assert!(&ab.ties.lower + &ba.ties.lower < one, "{a} vs {b}");
                assert!(&ab.ties.upper + &ba.ties.upper > one, "{a} vs {b}");
            }
        }
    }
}
