//! Main-term density formulas in terms of `N_m`, `B_m`, `C_m` and the Gaussian constants.

use std::f64::consts::PI;

use serde::Serialize;

use super::gaussian::{ordered_gaussian_constants, OrderedGaussianConstants};
use crate::bias::RaceReport;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticMode {
    /// Every displayed term: `α·C`, `β·B`, and the `λ·C²`, `β·C·C` block.
    Full,
    /// Drops the second-order `C` block.
    FirstOrder,
    /// Keeps only the `β·B` term (races among residues only or non-residues only).
    BOnly,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticDensity {
    pub estimate: f64,
    pub baseline: f64,
    /// Size of the dropped error terms, for context; not a rigorous bound.
    pub error_scale: f64,
    pub terms: AsymptoticTerms,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AsymptoticTerms {
    pub alpha_c: f64,
    pub beta_b: f64,
    pub second_order_c: f64,
}

/// `δ_{m;a,b} ≈ 1/2 − (√q+q)/(2(q−1)) · (C(a) − C(b)) / √(2π V)` with `V = 2(N_m − B_m(a,b))`.
pub fn density_asymptotic_r2(report: &RaceReport, q: u64, phi: u64, c_one: i64, degree: usize) -> Result<AsymptoticDensity> {
    if report.classes.len() != 2 {
        return Err(Error::Precondition(format!("two-way formula used with r = {}", report.classes.len())));
    }
    let v = report.v[0][1];
    if v <= 0.0 || !v.is_finite() {
        return Err(Error::Degenerate(format!("V_m(a,b) = {v} is not positive")));
    }
    let qf = q as f64;
    let dc = (report.c_values[0] - report.c_values[1]) as f64;
    let term = (qf.sqrt() + qf) / (2.0 * (qf - 1.0)) * dc / (2.0 * PI * v).sqrt();
    Ok(AsymptoticDensity {
        estimate: 0.5 - term,
        baseline: 0.5,
        error_scale: (c_one * c_one) as f64 * degree as f64 / phi as f64,
        terms: AsymptoticTerms { alpha_c: -term, ..Default::default() },
    })
}

/// The `r ≥ 3` expansion around `1/r!`.
pub fn density_asymptotic_r3plus(
    report: &RaceReport,
    q: u64,
    constants: &OrderedGaussianConstants,
    mode: AsymptoticMode,
) -> Result<AsymptoticDensity> {
    let r = report.classes.len();
    if !(3..=6).contains(&r) || constants.r != r {
        return Err(Error::Precondition(format!("r ≥ 3 formula needs 3 ≤ r ≤ 6 and matching constants, got r = {r}")));
    }
    let n = report.n_m;
    if n <= 0.0 {
        return Err(Error::Degenerate("N_m = 0: no zeros of modulus √q".into()));
    }
    let qf = q as f64;
    let c: Vec<f64> = report.c_values.iter().map(|&x| x as f64).collect();
    let baseline = 1.0 / (1..=r).map(|k| k as f64).product::<f64>();
    let alpha_c = -(qf + qf.sqrt()) / (2.0 * n.sqrt() * (qf - 1.0))
        * (0..r).map(|j| constants.alpha[j] * c[j]).sum::<f64>();
    let mut beta_b = 0.0;
    let mut beta_cc = 0.0;
    let mut b_max: f64 = 0.0;
    for j in 0..r {
        for k in j + 1..r {
            beta_b += constants.beta(j, k) * report.b[j][k];
            beta_cc += constants.beta(j, k) * c[j] * c[k];
            b_max = b_max.max(report.b[j][k].abs());
        }
    }
    beta_b /= n;
    let lambda_cc: f64 = (0..r).map(|j| constants.lambda[j] * c[j] * c[j]).sum();
    let second_order_c = (qf + qf * qf) / (4.0 * n * (qf - 1.0) * (qf - 1.0)) * (lambda_cc + 2.0 * beta_cc);
    let terms = match mode {
        AsymptoticMode::Full => AsymptoticTerms { alpha_c, beta_b, second_order_c },
        AsymptoticMode::FirstOrder => AsymptoticTerms { alpha_c, beta_b, second_order_c: 0.0 },
        AsymptoticMode::BOnly => AsymptoticTerms { beta_b, ..Default::default() },
    };
    let c_max = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    Ok(AsymptoticDensity {
        estimate: baseline + terms.alpha_c + terms.beta_b + terms.second_order_c,
        baseline,
        error_scale: 1.0 / n + c_max * b_max / n.powf(1.5) + b_max * b_max / (n * n),
        terms,
    })
}

/// Convenience wrapper choosing the formula by `r`.
pub fn density_asymptotic(
    report: &RaceReport,
    q: u64,
    phi: u64,
    c_one: i64,
    degree: usize,
    mode: AsymptoticMode,
) -> Result<AsymptoticDensity> {
    match report.classes.len() {
        2 => density_asymptotic_r2(report, q, phi, c_one, degree),
        r => density_asymptotic_r3plus(report, q, &ordered_gaussian_constants(r)?, mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::SpectrumBundle;
    use crate::ffpoly::Field;

    fn setup(m: &str, classes: &[&str]) -> (SpectrumBundle, RaceReport) {
        let f = Field::new(3).unwrap();
        let s = SpectrumBundle::for_modulus(&f.parse(m).unwrap()).unwrap();
        let cls: Vec<_> = classes.iter().map(|c| s.modulus().class(&f.parse(c).unwrap()).unwrap()).collect();
        let rep = s.race_report(&cls).unwrap();
        (s, rep)
    }

    #[test]
    fn r2_equal_c_is_half() {
        let (s, rep) = setup("T^5+2*T+1", &["1", "T^2"]);
        let m = s.modulus();
        let d = density_asymptotic_r2(&rep, 3, m.phi(), m.cm(&m.one()), 5).unwrap();
        assert_eq!(d.estimate, 0.5);
    }

    #[test]
    fn r2_non_residue_leads() {
        let (s, rep) = setup("T^5+2*T+1", &["T", "1"]);
        let m = s.modulus();
        assert_eq!(rep.c_values[0], -1);
        let d = density_asymptotic_r2(&rep, 3, m.phi(), m.cm(&m.one()), 5).unwrap();
        assert!(d.estimate > 0.5);
    }

    #[test]
    fn r3_b_only_matches_corollary() {
        let (_, rep) = setup("T^5+2*T+1", &["1", "T^2", "T^2+2*T+1"]);
        let consts = ordered_gaussian_constants(3).unwrap();
        let d = density_asymptotic_r3plus(&rep, 3, &consts, AsymptoticMode::BOnly).unwrap();
        let b = &rep.b;
        let want = 1.0 / 6.0 + (b[0][1] + b[1][2] - 2.0 * b[0][2]) / (4.0 * PI * 3f64.sqrt() * rep.n_m);
        assert!((d.estimate - want).abs() < 1e-14);
    }
}
