use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("characteristic {0} is not an odd prime")]
    InvalidField(u64),

    #[error("cannot parse polynomial {text:?}: {reason}")]
    Parse { text: String, reason: String },

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("polynomials over different fields")]
    FieldMismatch,

    #[error("modulus too large: phi(m) = {phi} exceeds the cap {cap}")]
    ModulusTooLarge { phi: u64, cap: u64 },

    #[error("degree {degree} exceeds the cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("{poly} is not coprime to the modulus")]
    NotCoprime { poly: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("construction infeasible: {0}")]
    Infeasible(String),

    #[error("spectrum not commensurate: {0}")]
    Incommensurate(String),

    #[error("period {period} exceeds the limit {limit}")]
    PeriodOverflow { period: u64, limit: u64 },

    #[error("empty spectrum: no zeros with positive imaginary part; use the periodic engine")]
    EmptySpectrum,

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
