//! Prime number races in 𝔽_q[T].
//!
//! The crate computes Dirichlet characters and L-polynomials modulo a polynomial `m`,
//! their inverse zeros, the bias quantities `C_m`, `N_m`, `B_m` that govern the
//! limiting distribution of normalized prime counts, and race densities by four routes:
//! asymptotic formulas, Monte Carlo sampling, exact periodic evaluation, and counting
//! actual primes.
//!
//! ```
//! use ffrace::{Field, Modulus};
//!
//! let f = Field::new(3).unwrap();
//! let m = Modulus::new(&f.parse("T^2+T+1").unwrap()).unwrap();
//! assert_eq!(m.phi(), 6);
//! ```

pub mod bias;
pub mod characters;
pub mod densities;
pub mod error;
pub mod ffpoly;
pub mod lfunctions;
pub mod numeric;
pub mod unitgroup;

pub use error::{Error, Result};
pub use ffpoly::{Factorization, Field, Poly};
pub use unitgroup::{Modulus, ResidueClass};

/// Exact rationals; logarithmic quantities are measured in units of `log q`.
pub type Rational = num_rational::BigRational;
