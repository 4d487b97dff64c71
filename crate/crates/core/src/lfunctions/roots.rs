//! Roots of small complex polynomials: Aberth–Ehrlich with a Durand–Kerner fallback,
//! followed by Newton polishing and multiplicity detection.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 500;
pub const CONVERGENCE: f64 = 1e-12;
/// Roots closer than this (relative) after polishing are merged into one multiple root.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Raw iterates closer than this are candidates for a multiple root.
const DETECT_TOL: f64 = 1e-3;

/// A root with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub z: Complex64,
    pub multiplicity: usize,
}

/// Evaluates `p` (coefficients in descending powers) and its derivative by Horner's rule.
fn horner2(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &c in p {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

/// True when `|p(z)|` is at the rounding level of Horner's rule at `z`.
fn at_noise_level(p: &[Complex64], z: Complex64) -> bool {
    let r = z.norm();
    let mut bound = 0.0;
    for c in p {
        bound = bound * r + c.norm();
    }
    horner2(p, z).0.norm() <= 64.0 * f64::EPSILON * bound
}

fn derivative(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    p[..n].iter().enumerate().map(|(i, &c)| c * (n - i) as f64).collect()
}

/// All roots of the polynomial with descending coefficients `p` (leading coefficient nonzero).
///
/// `radius` seeds the initial guesses on a circle.
pub fn find_roots(p: &[Complex64], radius: f64) -> Result<Vec<Root>> {
    let degree = p.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = p[0];
    let monic: Vec<Complex64> = p.iter().map(|&c| c / lead).collect();
    let raw = match aberth(&monic, radius) {
        Some(z) => z,
        None => durand_kerner(&monic, radius).ok_or_else(|| {
            Error::Numerical(format!("root iteration did not converge in {MAX_SWEEPS} sweeps for {monic:?}"))
        })?,
    };
    Ok(polish(&monic, raw))
}

fn initial_guesses(n: usize, radius: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect()
}

fn aberth(p: &[Complex64], radius: f64) -> Option<Vec<Complex64>> {
    let n = p.len() - 1;
    let mut z = initial_guesses(n, radius);
    for _ in 0..MAX_SWEEPS {
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let (v, d) = horner2(p, z[k]);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = v / d;
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if !step.is_finite() {
                return None;
            }
            z[k] -= step;
            worst = worst.max(step.norm() / z[k].norm().max(1.0));
        }
        if worst <= CONVERGENCE || z.iter().all(|&x| at_noise_level(p, x)) {
            return Some(z);
        }
    }
    None
}

fn durand_kerner(p: &[Complex64], radius: f64) -> Option<Vec<Complex64>> {
    let n = p.len() - 1;
    let mut z = initial_guesses(n, radius);
    for _ in 0..MAX_SWEEPS {
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let (v, _) = horner2(p, z[k]);
            let denom: Complex64 = (0..n).filter(|&j| j != k).map(|j| z[k] - z[j]).product();
            let step = v / denom;
            if !step.is_finite() {
                return None;
            }
            z[k] -= step;
            worst = worst.max(step.norm() / z[k].norm().max(1.0));
        }
        if worst <= CONVERGENCE || z.iter().all(|&x| at_noise_level(p, x)) {
            return Some(z);
        }
    }
    None
}

/// Groups nearby iterates, refines each group (as a multiple root when the derivatives
/// vanish there), then merges anything within [`CLUSTER_TOL`].
fn polish(p: &[Complex64], raw: Vec<Complex64>) -> Vec<Root> {
    let groups = single_linkage(&raw, DETECT_TOL);
    let mut roots: Vec<Root> = Vec::new();
    for group in groups {
        let k = group.len();
        let center: Complex64 = group.iter().sum::<Complex64>() / k as f64;
        if k > 1 {
            if let Some(z) = refine_multiple(p, center, k) {
                roots.push(Root { z, multiplicity: k });
                continue;
            }
        }
        for z in group {
            roots.push(Root { z: newton(p, z), multiplicity: 1 });
        }
    }
    // Final merge at the documented tolerance.
    let mut merged: Vec<Root> = Vec::new();
    for r in roots {
        match merged.iter_mut().find(|m| (m.z - r.z).norm() <= CLUSTER_TOL * m.z.norm().max(1.0)) {
            Some(m) => {
                let total = m.multiplicity + r.multiplicity;
                m.z = (m.z * m.multiplicity as f64 + r.z * r.multiplicity as f64) / total as f64;
                m.multiplicity = total;
            }
            None => merged.push(r),
        }
    }
    merged
}

fn single_linkage(points: &[Complex64], tol: f64) -> Vec<Vec<Complex64>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= tol * points[i].norm().max(1.0) {
                let (a, b) = (label[i], label[j]);
                if a != b {
                    for l in label.iter_mut() {
                        if *l == b {
                            *l = a;
                        }
                    }
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, &l) in label.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| *g == l) {
            Some((_, v)) => v.push(points[i]),
            None => groups.push((l, vec![points[i]])),
        }
    }
    groups.into_iter().map(|(_, v)| v).collect()
}

fn newton(p: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..4 {
        let (v, d) = horner2(p, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = v / d;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Newton on the `(k−1)`-th derivative; accepts when the lower derivatives also vanish.
fn refine_multiple(p: &[Complex64], start: Complex64, k: usize) -> Option<Complex64> {
    let mut derivs = vec![p.to_vec()];
    for _ in 1..k {
        let next = derivative(derivs.last().unwrap());
        derivs.push(next);
    }
    let target = &derivs[k - 1];
    let mut z = start;
    for _ in 0..30 {
        let (v, d) = horner2(target, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = v / d;
        if !step.is_finite() {
            return None;
        }
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    let scale: f64 = p.iter().map(|c| c.norm()).fold(0.0, f64::max) * z.norm().max(1.0).powi(p.len() as i32);
    let vanishes = derivs[..k - 1].iter().all(|d| horner2(d, z).0.norm() <= 1e-9 * scale);
    vanishes.then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut p = vec![c(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![c(0.0, 0.0); p.len() + 1];
            for (i, &a) in p.iter().enumerate() {
                next[i] += a;
                next[i + 1] -= a * r;
            }
            p = next;
        }
        p
    }

    #[test]
    fn simple_roots() {
        let want = [c(0.0, 3f64.sqrt()), c(0.0, -(3f64.sqrt())), c(1.0, 0.0), c(-1.5, 0.7)];
        let roots = find_roots(&poly_from_roots(&want), 3f64.sqrt()).unwrap();
        assert_eq!(roots.len(), 4);
        for w in want {
            assert!(roots.iter().any(|r| (r.z - w).norm() < 1e-12 && r.multiplicity == 1));
        }
    }

    #[test]
    fn multiple_roots_are_merged() {
        let s = 3f64.sqrt();
        let want = [c(s, 0.0), c(s, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)];
        let roots = find_roots(&poly_from_roots(&want), s).unwrap();
        let double = roots.iter().find(|r| (r.z - c(s, 0.0)).norm() < 1e-9).unwrap();
        assert_eq!(double.multiplicity, 2);
        let triple = roots.iter().find(|r| (r.z - c(-1.0, 0.0)).norm() < 1e-9).unwrap();
        assert_eq!(triple.multiplicity, 3);
        assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), 6);
    }

    #[test]
    fn constant_polynomial_has_no_roots() {
        assert!(find_roots(&[c(1.0, 0.0)], 1.0).unwrap().is_empty());
    }
}
