use super::{Field, Poly};
use crate::numeric::{divisors, mobius};

/// `(1/n) Σ_{d|n} μ(d) q^{n/d}`: the number of monic irreducibles of degree `n`.
pub fn necklace_count(q: u64, n: usize) -> u64 {
    assert!(n >= 1);
    let mut total: i128 = 0;
    for d in divisors(n as u64) {
        let mu = mobius(d) as i128;
        if mu != 0 {
            total += mu * (q as i128).pow((n as u64 / d) as u32);
        }
    }
    (total / n as i128) as u64
}

/// π_q(n), the number of monic irreducibles of degree `n`.
pub fn count_irreducibles(field: Field, n: usize) -> u64 {
    necklace_count(field.q(), n)
}

/// Monic irreducibles of degree `n` in increasing order, found by an Eratosthenes-style
/// sieve: every composite of degree `n` is marked as `P·g` with `deg P ≤ n/2`.
pub fn list_irreducibles(field: Field, n: usize) -> Vec<Poly> {
    if n == 0 {
        return Vec::new();
    }
    let p = field.p();
    let size = field.norm_of_degree(n).expect("q^n overflows") as usize;
    let mut composite = vec![false; size];
    for d in 1..=n / 2 {
        let cofactor_count = field.norm_of_degree(n - d).unwrap() as usize;
        for prime in list_irreducibles(field, d) {
            let pc = prime.coeffs();
            let mut g = vec![0u32; n - d + 1];
            g[n - d] = 1;
            for _ in 0..cofactor_count {
                composite[monic_product_index(p, pc, &g, n)] = true;
                increment(&mut g[..n - d], p);
            }
        }
    }
    let mut primes: Vec<Poly> = composite
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(idx, _)| {
            let mut coeffs = Poly::from_index(field, idx as u64).coeffs().to_vec();
            coeffs.resize(n, 0);
            coeffs.push(1);
            Poly::from_raw(field, coeffs)
        })
        .collect();
    primes.sort();
    primes
}

/// Base-p index of the low `n` coefficients of the monic product `a·b` (degree `n`).
fn monic_product_index(p: u32, a: &[u32], b: &[u32], n: usize) -> usize {
    let mut acc = [0u64; 64];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if i + j < n {
                acc[i + j] += x as u64 * y as u64;
            }
        }
    }
    let p = p as u64;
    let mut idx = 0u64;
    for k in (0..n).rev() {
        idx = idx * p + acc[k] % p;
    }
    idx as usize
}

fn increment(digits: &mut [u32], p: u32) {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < p {
            return;
        }
        *d = 0;
    }
}
