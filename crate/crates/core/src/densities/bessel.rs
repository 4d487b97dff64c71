//! The Bessel function `J₀` on the real line.

use std::f64::consts::FRAC_PI_4;

/// Switch-over point between the power series and the Hankel expansion.
pub const SERIES_LIMIT: f64 = 12.0;

/// `J₀(x)`: power series for `|x| ≤ 12`, Hankel asymptotic expansion beyond.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(x)
    } else {
        hankel(x)
    }
}

fn series(x: f64) -> f64 {
    let h = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 1.0;
    loop {
        term *= h / (n * n);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && n > 2.0 {
            return sum;
        }
        n += 1.0;
    }
}

fn hankel(x: f64) -> f64 {
    // a_k = Π_{j=1..k} (−(2j−1)²) / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut zpow = 1.0;
    for k in 0..18 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= -(odd * odd) / (k as f64 * 8.0);
            zpow *= x;
        }
        let term = a / zpow;
        // P collects even k with sign (−1)^{k/2}; Q collects odd k with sign (−1)^{(k−1)/2}.
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
