use thiserror::Error;

/// Errors raised by the library. Every fallible operation returns one of these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SftError {
    #[error("alphabet size must be at least 2, got {0}")]
    InvalidAlphabet(usize),

    #[error("symbol {symbol} is not in the alphabet of size {r}")]
    InvalidSymbol { symbol: usize, r: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("resource cap exceeded: {0}")]
    CapExceeded(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("singular matrix")]
    Singular,

    #[error("invalid Hermite normal form: {0}")]
    InvalidHermite(String),

    #[error("not unimodular: determinant {0}")]
    NotUnimodular(i64),

    #[error("matrix is not irreducible")]
    NotIrreducible,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SftError>;
