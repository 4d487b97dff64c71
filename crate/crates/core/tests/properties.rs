mod common;

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use proptest::prelude::*;

use common::poly;
use ffrace::bias::{extremely_biased_classifier, SpectrumBundle};
use ffrace::characters::CharacterGroup;
use ffrace::ffpoly::factor;
use ffrace::{Field, Modulus, Poly};

fn arb_poly(q: u64, max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(0..q as u32, 1..=max_deg + 1).prop_map(move |c| Poly::new(Field::new(q).unwrap(), c))
}

fn arb_nonzero(q: u64, max_deg: usize) -> impl Strategy<Value = Poly> {
    arb_poly(q, max_deg).prop_filter("nonzero", |p| !p.is_zero())
}

fn group() -> &'static Arc<CharacterGroup> {
    static G: OnceLock<Arc<CharacterGroup>> = OnceLock::new();
    G.get_or_init(|| {
        let m = Modulus::new(&poly(3, "T^5+T^4+T^2")).unwrap();
        Arc::new(CharacterGroup::new(Arc::new(m)).unwrap())
    })
}

fn spectrum() -> &'static SpectrumBundle {
    static S: OnceLock<SpectrumBundle> = OnceLock::new();
    S.get_or_init(|| SpectrumBundle::for_modulus(&poly(3, "T^4+T+2")).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factorization_round_trip(f in arb_nonzero(5, 10)) {
        let fac = factor(&f).unwrap();
        prop_assert_eq!(fac.expand(f.field()), f);
        for (p, e) in &fac.factors {
            prop_assert!(p.is_monic());
            prop_assert!(ffrace::ffpoly::is_irreducible(p));
            prop_assert!(*e >= 1);
        }
    }

    #[test]
    fn residue_index_round_trip(f in arb_poly(3, 12)) {
        prop_assert_eq!(Poly::from_index(f.field(), f.index()), f);
    }

    #[test]
    fn discrete_log_is_a_homomorphism(a in arb_nonzero(3, 7), b in arb_nonzero(3, 7)) {
        let m = group().modulus();
        if let (Some(x), Some(y)) = (m.try_class(&a), m.try_class(&b)) {
            let ab = m.class(&a.mulmod(&b, m.poly()).unwrap()).unwrap();
            prop_assert_eq!(ab.flat(), m.mul_flat(x.flat(), y.flat()));
            prop_assert_eq!(m.mul_flat(x.flat(), m.inv_flat(x.flat())), m.one().flat());
        }
    }

    #[test]
    fn column_orthogonality(a in arb_nonzero(3, 7)) {
        let g = group();
        let m = g.modulus();
        if let Some(x) = m.try_class(&a) {
            let s: Complex64 = g.characters().iter().map(|chi| g.value(chi, &x).to_complex()).sum();
            let want = if x == m.one() { m.phi() as f64 } else { 0.0 };
            prop_assert!((s - want).norm() < 1e-9, "sum {} at {}", s, x);
        }
    }

    #[test]
    fn row_orthogonality(i in 0usize..10_000, j in 0usize..10_000) {
        let g = group();
        let (i, j) = (i % g.len(), j % g.len());
        let (ci, cj) = (g.get(i), g.get(j));
        let s: Complex64 = g
            .modulus()
            .units()
            .map(|a| g.value(ci, &a).to_complex() * g.value(cj, &a).conj().to_complex())
            .sum();
        let want = if i == j { g.modulus().phi() as f64 } else { 0.0 };
        prop_assert!((s - want).norm() < 1e-8);
    }

    #[test]
    fn b_m_symmetric_and_translation_invariant(a in arb_nonzero(3, 3), b in arb_nonzero(3, 3), c in arb_nonzero(3, 3)) {
        let s = spectrum();
        let m = s.modulus();
        if let (Some(x), Some(y), Some(z)) = (m.try_class(&a), m.try_class(&b), m.try_class(&c)) {
            prop_assume!(x != y);
            let bxy = s.b_m(&x, &y).unwrap();
            prop_assert!((bxy - s.b_m(&y, &x).unwrap()).abs() < 1e-9);
            let shifted = s.b_m(&m.mul(&z, &x), &m.mul(&z, &y)).unwrap();
            prop_assert!((bxy - shifted).abs() < 1e-9);
            prop_assert!((bxy - s.b_m_direct(&x, &y)).abs() < 1e-8);
            prop_assert!(bxy.abs() <= s.n_m() + 1e-9);
        }
    }

    #[test]
    fn classifier_ignores_order(
        classes in prop::collection::vec(arb_nonzero(3, 3), 2..5),
        seed in any::<u64>(),
    ) {
        let verdict = extremely_biased_classifier(&classes, 3).unwrap();
        let mut shuffled = classes.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed.rotate_left(i as u32) % (i as u64 + 1)) as usize);
        }
        let other = extremely_biased_classifier(&shuffled, 3).unwrap();
        prop_assert_eq!(std::mem::discriminant(&verdict), std::mem::discriminant(&other));
    }

    #[test]
    fn gcd_divides_both(a in arb_poly(5, 8), b in arb_poly(5, 8)) {
        let g = a.gcd(&b);
        if !g.is_zero() {
            prop_assert!(g.divides(&a) && g.divides(&b));
            prop_assert!(g.is_monic());
        }
    }
}
