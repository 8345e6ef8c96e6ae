use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("quadratic form is not positive definite")]
    NotPositiveDefinite,
    #[error("labels {0} do not give a positive definite unimodular matrix")]
    NotPu(String),
    #[error("duplicate alpha point {0} produced by distinct sign vectors")]
    DuplicateAlpha(String),
    #[error("labels {0} fall outside the unimodular family: {1}")]
    OutsideFamily(String, String),
    #[error("modulus must be positive, got {0}")]
    NonPositiveModulus(String),
    #[error("h = {h} and k = {k} are not coprime")]
    NotCoprime { h: String, k: String },
    #[error("unsupported vertex power {0}; only +1 and -1 occur on an H-graph")]
    UnsupportedPower(i64),
    #[error("{0} is not in the quantum set: the main Gauss factor does not vanish")]
    NotInQuantumSet(String),
    #[error("phases are not periodic modulo k = {0} for this exponent multiplier")]
    NotPeriodic(String),
    #[error("derivative order {0} must be odd")]
    EvenDerivative(usize),
    #[error("radial parameter t must be positive")]
    NonPositiveT,
    #[error("expansion order {0} exceeds the supported maximum of {1}")]
    OrderTooLarge(usize, usize),
    #[error("integer {0} does not fit the machine word used for this computation")]
    Overflow(String),
    #[error("appendix dataset checksum mismatch: expected {expected}, found {found}")]
    Checksum { expected: String, found: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
