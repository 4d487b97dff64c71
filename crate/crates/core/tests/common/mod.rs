#![allow(dead_code)]

use ffrace::{Field, Poly};

/// Moduli used by the integration and acceptance tests: `(q, modulus)`.
pub const CORPUS: &[(u64, &str)] = &[
    (3, "T^2+T+1"),
    (3, "T^3+2*T"),
    (3, "T^2+1"),
    (3, "T^3+2*T+1"),
    (3, "T^3+T^2"),
    (3, "T^4"),
    (3, "T^4+T+2"),
    (3, "T^4+2"),
    (3, "T^3+T^2+2"),
    (3, "T^5+2*T+1"),
    (3, "T^5+T^4+T^2"),
    (3, "T^6+T+2"),
    (3, "T^6+2*T^4+T^2"),
    (3, "T^7+2*T+1"),
    (3, "T^8+T^4+2*T+1"),
    (3, "T^8+2*T^7+2*T^6+T^5+2*T^4+T^3+2*T+1"),
    (3, "T^8+2*T^6+2*T^4+T^2"),
    (5, "T^2+2"),
    (5, "T^2+T"),
    (5, "T^3+T+1"),
    (5, "T^3+4*T"),
    (5, "T^4+2"),
    (5, "T^4+T^3+T+1"),
    (5, "T^5+T+3"),
];

pub fn poly(q: u64, text: &str) -> Poly {
    Field::new(q).unwrap().parse(text).unwrap()
}

/// The degree-8 modulus over 𝔽₃ used for the sampling checks: no real and no repeated
/// zeros of modulus √3, φ = 2560.
pub const SAMPLING_MODULUS: &str = "T^8+2*T^7+2*T^6+T^5+2*T^4+T^3+2*T+1";
