//! Race-level bias quantities built from the multiset of inverse zeros:
//! `N_m`, `B_m(a, b)`, the covariance of the limiting vector and the main-term predictors.

mod construct;

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::characters::CharacterGroup;
use crate::error::{Error, Result};
use crate::ffpoly::Poly;
use crate::lfunctions::{group_dft, LTable, ZeroKind};
use crate::numeric::Neumaier;
use crate::unitgroup::{Modulus, ResidueClass};

pub use construct::{
    construct_biased_tuple, extremely_biased_classifier, lambda0_triple_test, BiasedConstruction, ConstructionPrimes,
    ExtremeBias, TripleWitness, TupleEntry, TupleKind,
};

/// Relative tolerance under which `Im γ` counts as zero.
pub const REAL_ZERO_TOL: f64 = 1e-8;

/// One inverse zero of modulus `√q` attached to its character.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralZero {
    pub character: usize,
    pub gamma: Complex64,
    /// `|γ/(γ−1)|`
    pub amplitude: f64,
    pub multiplicity: usize,
}

impl SpectralZero {
    pub fn weight(&self) -> f64 {
        self.amplitude * self.amplitude
    }

    pub fn theta(&self) -> f64 {
        self.gamma.arg()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LiDiagnostics {
    /// Some `√q` zero is real (`θ ∈ {0, π}`).
    pub real_zero: bool,
    /// Some `√q` zero is a repeated root.
    pub repeated_zero: bool,
}

/// The zeros `S = ∪_{χ≠χ₀} {γ_χ}` of modulus `√q`, split by the sign of `Im γ`, with the
/// derived sums `N_m` and `B_m(·,·)` precomputed for every ratio class.
#[derive(Clone, Debug)]
pub struct SpectrumBundle {
    group: Arc<CharacterGroup>,
    positive: Vec<SpectralZero>,
    real: Vec<SpectralZero>,
    repeated: bool,
    n_m: f64,
    /// `β(c) = B_m(ca, a)` for every unit `c`, indexed by flat exponent.
    beta: Vec<f64>,
}

impl SpectrumBundle {
    pub fn new(table: &LTable) -> Self {
        let zeros = table
            .nonprincipal()
            .flat_map(|l| {
                l.zeros.iter().filter(|z| z.kind == ZeroKind::SqrtQ).map(move |z| (l.character, z.gamma, z.multiplicity))
            })
            .collect();
        Self::from_zeros(table.group_arc().clone(), zeros)
    }

    pub fn for_modulus(m: &Poly) -> Result<Self> {
        Ok(Self::new(&crate::lfunctions::ltable_for(m)?))
    }

    /// Builds the bundle from an explicit list of `(character, γ, multiplicity)`; used for
    /// synthetic spectra as well as computed ones.
    pub fn from_zeros(group: Arc<CharacterGroup>, zeros: Vec<(usize, Complex64, usize)>) -> Self {
        let sqrt_q = (group.modulus().q() as f64).sqrt();
        let mut positive = Vec::new();
        let mut real = Vec::new();
        let mut repeated = false;
        for (character, gamma, multiplicity) in zeros {
            let zero = SpectralZero { character, gamma, amplitude: (gamma / (gamma - 1.0)).norm(), multiplicity };
            repeated |= multiplicity > 1;
            if gamma.im.abs() <= REAL_ZERO_TOL * sqrt_q {
                real.push(zero);
            } else if gamma.im > 0.0 {
                positive.push(zero);
            }
        }
        let phi = group.len();
        let mut per_char = vec![Neumaier::new(); phi];
        for z in &positive {
            per_char[z.character].add(z.multiplicity as f64 * z.weight());
        }
        let w: Vec<f64> = per_char.iter().map(Neumaier::value).collect();
        let n_m = 2.0 * w.iter().copied().collect::<Neumaier>().value();
        // β(c) = Σ_χ (W_χ + W_χ̄) χ(c): one group DFT over the character index.
        let mut spectrum: Vec<Complex64> = (0..phi)
            .map(|i| {
                let conj = group.conjugate_index(group.get(i));
                Complex64::new(w[i] + w[conj], 0.0)
            })
            .collect();
        group_dft(&mut spectrum, group.modulus().orders(), &mut FftPlanner::new());
        let beta = spectrum.into_iter().map(|z| z.re).collect();
        SpectrumBundle { group, positive, real, repeated, n_m, beta }
    }

    pub fn group(&self) -> &CharacterGroup {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<CharacterGroup> {
        &self.group
    }

    pub fn modulus(&self) -> &Modulus {
        self.group.modulus()
    }

    pub fn q(&self) -> u64 {
        self.modulus().q()
    }

    /// Zeros with `Im γ > 0`, the index set of the limiting random vector.
    pub fn positive_zeros(&self) -> &[SpectralZero] {
        &self.positive
    }

    /// Real zeros of modulus `√q`; excluded from `N_m` and `B_m`.
    pub fn real_zeros(&self) -> &[SpectralZero] {
        &self.real
    }

    /// All `√q` zeros: the positive ones, their conjugate partners at `χ̄`, and the real ones.
    pub fn all_zeros(&self) -> Vec<SpectralZero> {
        let mut out = Vec::with_capacity(2 * self.positive.len() + self.real.len());
        for z in &self.positive {
            out.push(*z);
            out.push(SpectralZero {
                character: self.group.conjugate_index(self.group.get(z.character)),
                gamma: z.gamma.conj(),
                ..*z
            });
        }
        out.extend_from_slice(&self.real);
        out
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    /// True when a real inverse zero of modulus `√q` is present.
    pub fn li_violation(&self) -> bool {
        !self.real.is_empty()
    }

    pub fn li_diagnostics(&self) -> LiDiagnostics {
        LiDiagnostics { real_zero: !self.real.is_empty(), repeated_zero: self.repeated }
    }

    /// `N_m = 2 Σ_χ Σ_{Im γ > 0} |γ/(γ−1)|²`.
    pub fn n_m(&self) -> f64 {
        self.n_m
    }

    /// `B_m` as a function of the ratio class `c = a/b`.
    pub fn b_ratio(&self, c: &ResidueClass) -> f64 {
        self.beta[c.flat() as usize]
    }

    /// `B_m(a, b)`.
    pub fn b_m(&self, a: &ResidueClass, b: &ResidueClass) -> Result<f64> {
        if a.flat() == b.flat() {
            return Err(Error::Precondition(format!("B_m needs distinct classes, got {} twice", a.rep())));
        }
        Ok(self.b_ratio(&self.modulus().div(a, b)))
    }

    /// `B_m(a, b)` summed zero by zero (slow oracle for [`Self::b_m`]).
    pub fn b_m_direct(&self, a: &ResidueClass, b: &ResidueClass) -> f64 {
        let ratio = self.modulus().div(a, b);
        let mut acc = Neumaier::new();
        for z in &self.positive {
            let v = self.group.value(self.group.get(z.character), &ratio).to_complex();
            acc.add(2.0 * v.re * z.weight() * z.multiplicity as f64);
        }
        acc.value()
    }

    /// `Σ_{(a,b) ∈ A₂(m)} B_m(a, b)`, which should equal `−φ(m) N_m`.
    pub fn pair_sum(&self) -> f64 {
        let phi = self.beta.len() as f64;
        phi * self.beta.iter().skip(1).copied().collect::<Neumaier>().value()
    }

    /// Average of `|B_m(a, b)|` over ordered pairs of distinct units, with the main terms
    /// of the two-sided bound for comparison.
    pub fn first_moment(&self) -> FirstMoment {
        let phi = self.beta.len();
        let q = self.q() as f64;
        let big_m = self.modulus().degree() as f64;
        let mean = if phi < 2 {
            0.0
        } else {
            self.beta.iter().skip(1).map(|b| b.abs()).collect::<Neumaier>().value() / (phi - 1) as f64
        };
        FirstMoment {
            mean,
            pairs: (phi as u64) * (phi.saturating_sub(1) as u64),
            lower_main: q / (q - 1.0) * big_m,
            upper_main: 17.0 * q / (q - 1.0) * big_m,
        }
    }

    /// `C_m(a)`.
    pub fn c_m(&self, a: &ResidueClass) -> i64 {
        self.modulus().cm(a)
    }

    /// `¼ ((q − √q)/(q − 1))²`, the weight of the `C_m` block in the covariance.
    pub fn c_block_weight(&self) -> f64 {
        let q = self.q() as f64;
        let d = (q - q.sqrt()) / (q - 1.0);
        0.25 * d * d
    }

    /// Covariance matrix of the limiting vector for the given classes.
    pub fn covariance_matrix(&self, classes: &[ResidueClass]) -> Result<DMatrix<f64>> {
        check_distinct(classes)?;
        let r = classes.len();
        let k = self.c_block_weight();
        let c: Vec<f64> = classes.iter().map(|a| self.c_m(a) as f64).collect();
        let mut m = DMatrix::zeros(r, r);
        for j in 0..r {
            for l in 0..r {
                let base = if j == l { self.n_m } else { self.b_m(&classes[j], &classes[l])? };
                m[(j, l)] = base + k * c[j] * c[l];
            }
        }
        Ok(m)
    }

    /// Full report for a race among `classes`.
    pub fn race_report(&self, classes: &[ResidueClass]) -> Result<RaceReport> {
        let cov = self.covariance_matrix(classes)?;
        let r = classes.len();
        let mut b = vec![vec![0.0; r]; r];
        let mut v = vec![vec![0.0; r]; r];
        for j in 0..r {
            for l in 0..r {
                if j != l {
                    b[j][l] = self.b_m(&classes[j], &classes[l])?;
                    v[j][l] = 2.0 * (self.n_m - b[j][l]);
                }
            }
        }
        let eig = SymmetricEigen::new(cov.clone()).eigenvalues;
        let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let trace = cov.trace();
        Ok(RaceReport {
            classes: classes.iter().map(|c| c.rep().to_string()).collect(),
            c_values: classes.iter().map(|a| self.c_m(a)).collect(),
            n_m: self.n_m,
            b,
            v,
            covariance: (0..r).map(|j| (0..r).map(|l| cov[(j, l)]).collect()).collect(),
            min_eigenvalue,
            positive_semidefinite: min_eigenvalue >= -1e-8 * trace.abs().max(1.0),
            li: self.li_diagnostics(),
            predictors: None,
        })
    }

    /// Adds predictor comparisons for every pair whose representatives have degree `< M`.
    pub fn with_predictors(&self, mut report: RaceReport, classes: &[ResidueClass]) -> RaceReport {
        let mut rows = Vec::new();
        for j in 0..classes.len() {
            for l in j + 1..classes.len() {
                let (a, b) = (classes[j].rep(), classes[l].rep());
                if let Ok(predicted) = b_m_predictor(self.modulus(), a, b) {
                    rows.push(PredictorRow {
                        pair: (j, l),
                        computed: report.b[j][l],
                        predicted,
                        difference: report.b[j][l] - predicted,
                    });
                }
            }
        }
        report.predictors = Some(rows);
        report
    }
}

fn check_distinct(classes: &[ResidueClass]) -> Result<()> {
    for (j, a) in classes.iter().enumerate() {
        if classes[..j].iter().any(|b| b.flat() == a.flat()) {
            return Err(Error::Precondition(format!("class {} repeated in the race", a.rep())));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FirstMoment {
    pub mean: f64,
    pub pairs: u64,
    pub lower_main: f64,
    pub upper_main: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PredictorRow {
    pub pair: (usize, usize),
    pub computed: f64,
    pub predicted: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RaceReport {
    pub classes: Vec<String>,
    pub c_values: Vec<i64>,
    pub n_m: f64,
    /// `B_m(a_j, a_k)`; the diagonal is left at zero.
    pub b: Vec<Vec<f64>>,
    /// `V_m(a_j, a_k) = 2(N_m − B_m(a_j, a_k))`.
    pub v: Vec<Vec<f64>>,
    pub covariance: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    pub positive_semidefinite: bool,
    pub li: LiDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictors: Option<Vec<PredictorRow>>,
}

/// Main term of `B_m(a, b)` for representatives of degree `< M`.
///
/// Equal degrees give `−(q²+q)/(2(q−1)²)·φ(m)·[a = −b]`; distinct degrees give
/// `−q/((q−1) log q)·φ(m)·Λ₀(Pmax/Pmin)`.
pub fn b_m_predictor(modulus: &Modulus, a: &Poly, b: &Poly) -> Result<f64> {
    let big_m = modulus.degree();
    if a.is_zero() || b.is_zero() || a.deg() >= big_m || b.deg() >= big_m {
        return Err(Error::Precondition(format!("predictor needs 0 ≤ deg < {big_m}, got {a} and {b}")));
    }
    let q = modulus.q() as f64;
    let phi = modulus.phi() as f64;
    if a.deg() == b.deg() {
        let l = (a + b).is_zero() as u8 as f64;
        return Ok(-(q * q + q) / (2.0 * (q - 1.0) * (q - 1.0)) * phi * l);
    }
    let (big, small) = if a.deg() > b.deg() { (a, b) } else { (b, a) };
    let lambda0 = big.div_exact(small).map(|x| x.lambda0()).unwrap_or_else(num_traits::Zero::zero);
    // Λ₀ is held in log-q units, which cancels the 1/log q.
    Ok(-q / (q - 1.0) * phi * lambda0.to_f64().unwrap_or(0.0))
}
