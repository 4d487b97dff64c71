//! Exact densities when every zero angle is a rational multiple of `π`.
//!
//! The limit `E_a(X) = −C(a)𝓑_q(X) − Σ_χ χ̄(a) Σ_γ e^{iθX} γ/(γ−1)` is then periodic in
//! `X`, and the density of an ordering is a count over one period.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::bias::SpectrumBundle;
use crate::error::{Error, Result};
use crate::numeric::rational_serde;
use crate::unitgroup::ResidueClass;
use crate::Rational;

/// Largest denominator accepted for `θ/π`.
pub const MAX_ANGLE_DENOMINATOR: i64 = 64;

/// Residual allowed between `θ/π` and its rational approximation.
pub const ANGLE_TOL: f64 = 1e-9;

pub const MAX_PERIOD: u64 = 1_000_000;

/// Values closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-9;

/// Which parity of `X` carries `q/(q−1)` in the two-point term `𝓑_q(X)`; the other
/// parity carries `√q/(q−1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// `𝓑_q(X)`.
    pub fn b_term(self, q: u64, x: u64) -> f64 {
        let qf = q as f64;
        let even = x % 2 == 0;
        if even == (self == Parity::Even) {
            qf / (qf - 1.0)
        } else {
            qf.sqrt() / (qf - 1.0)
        }
    }
}

/// Best rational approximation `n/d` of `x` with `d ≤ max_den`, by continued fractions.
pub fn rational_approx(x: f64, max_den: i64) -> (i64, i64) {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    let mut best = (x.round() as i64, 1);
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den {
            break;
        }
        best = (h2, k2);
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicTerm {
    pub character: usize,
    /// `θ = π · angle`.
    #[serde(serialize_with = "rational_serde::one")]
    pub angle: Rational,
    /// `γ/(γ−1)`
    pub weight: Complex64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct PeriodicSpectrum<'a> {
    spectrum: &'a SpectrumBundle,
    terms: Vec<PeriodicTerm>,
    period: u64,
    parity: Parity,
}

/// The limit vector on each residue of `X` modulo the period, `X = 1..=L`.
#[derive(Clone, Debug, Serialize)]
pub struct LimitTable {
    pub period: u64,
    pub classes: Vec<String>,
    /// `values[i][j] = E_{a_j}(X)` for `X = i + 1`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TieReport {
    /// Values of `X mod L` (as `1..=L`) where two of the limits coincide.
    pub tied_residues: Vec<u64>,
    #[serde(serialize_with = "rational_serde::one")]
    pub lower: Rational,
    /// Adds the tied residues where the non-strict ordering holds.
    #[serde(serialize_with = "rational_serde::one")]
    pub upper: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicDensity {
    #[serde(serialize_with = "rational_serde::one")]
    pub density: Rational,
    pub estimate: f64,
    pub period: u64,
    pub parity: Parity,
    pub ties: TieReport,
}

impl<'a> PeriodicSpectrum<'a> {
    pub fn new(spectrum: &'a SpectrumBundle) -> Result<Self> {
        Self::with_parity(spectrum, Parity::Even)
    }

    pub fn with_parity(spectrum: &'a SpectrumBundle, parity: Parity) -> Result<Self> {
        let mut terms = Vec::new();
        let mut period: u64 = 2;
        for z in spectrum.all_zeros() {
            let t = z.gamma.arg() / std::f64::consts::PI;
            let (n, d) = rational_approx(t, MAX_ANGLE_DENOMINATOR);
            if (t - n as f64 / d as f64).abs() > ANGLE_TOL {
                return Err(Error::Incommensurate(format!(
                    "zero {:.6}{:+.6}i has θ/π = {t:.12}, not a fraction with denominator ≤ {MAX_ANGLE_DENOMINATOR}",
                    z.gamma.re, z.gamma.im
                )));
            }
            // e^{iπ n X / d} has period 2d / gcd(n, 2d).
            let p = (2 * d / n.gcd(&(2 * d))) as u64;
            period = period.lcm(&p);
            if period > MAX_PERIOD {
                return Err(Error::PeriodOverflow { period, limit: MAX_PERIOD });
            }
            terms.push(PeriodicTerm {
                character: z.character,
                angle: Ratio::new(n.into(), d.into()),
                weight: z.gamma / (z.gamma - 1.0),
                multiplicity: z.multiplicity,
            });
        }
        Ok(PeriodicSpectrum { spectrum, terms, period, parity })
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn terms(&self) -> &[PeriodicTerm] {
        &self.terms
    }

    /// The periodic limit of `E_a(X)`.
    pub fn limit(&self, a: &ResidueClass, x: u64) -> f64 {
        let group = self.spectrum.group();
        let c = self.spectrum.c_m(a) as f64;
        let mut osc = Complex64::new(0.0, 0.0);
        // Reduce X first so the phase stays accurate for large X.
        let xr = (x % self.period) as f64;
        for t in &self.terms {
            let chi_bar = group.value(group.get(t.character), a).conj().to_complex();
            let angle = num_traits::ToPrimitive::to_f64(&t.angle).unwrap_or(0.0);
            let phase = Complex64::from_polar(1.0, std::f64::consts::PI * angle * xr);
            osc += chi_bar * phase * t.weight * t.multiplicity as f64;
        }
        -c * self.parity.b_term(self.spectrum.q(), x) - osc.re
    }

    pub fn limit_table(&self, classes: &[ResidueClass]) -> LimitTable {
        LimitTable {
            period: self.period,
            classes: classes.iter().map(|c| c.to_string()).collect(),
            values: (1..=self.period).map(|x| classes.iter().map(|a| self.limit(a, x)).collect()).collect(),
        }
    }

    /// Density of `{X : E_{a_1}(X) > … > E_{a_r}(X)}`, ties excluded and reported.
    pub fn density(&self, classes: &[ResidueClass]) -> Result<PeriodicDensity> {
        if classes.len() < 2 {
            return Err(Error::Precondition("a race needs at least two classes".into()));
        }
        let table = self.limit_table(classes);
        let mut strict = 0u64;
        let mut weak = 0u64;
        let mut tied = Vec::new();
        for (i, row) in table.values.iter().enumerate() {
            let has_tie = (0..row.len()).any(|j| (j + 1..row.len()).any(|k| (row[j] - row[k]).abs() <= TIE_TOL));
            if has_tie {
                tied.push(i as u64 + 1);
                if row.windows(2).all(|w| w[0] >= w[1] - TIE_TOL) {
                    weak += 1;
                }
            } else if row.windows(2).all(|w| w[0] > w[1]) {
                strict += 1;
            }
        }
        let l = self.period;
        let density = Rational::new(strict.into(), l.into());
        Ok(PeriodicDensity {
            estimate: strict as f64 / l as f64,
            period: l,
            parity: self.parity,
            ties: TieReport {
                tied_residues: tied,
                lower: density.clone(),
                upper: Rational::new((strict + weak).into(), l.into()),
            },
            density,
        })
    }
}

/// `density_exact_periodic` with the default parity.
pub fn density_exact_periodic(spectrum: &SpectrumBundle, classes: &[ResidueClass]) -> Result<PeriodicDensity> {
    PeriodicSpectrum::new(spectrum)?.density(classes)
}
