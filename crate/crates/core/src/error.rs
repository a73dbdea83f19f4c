use thiserror::Error;

/// Errors raised by the estimators and sequence transforms.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("input sequence is empty")]
    Empty,

    #[error("sequence lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("symbol {symbol} at position {position} is outside alphabet of size {alphabet_size}")]
    SymbolOutOfRange {
        symbol: u32,
        position: usize,
        alphabet_size: u32,
    },

    #[error("series contains a non-finite value at position {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input has zero variance")]
    ZeroVariance,

    #[error("sequence too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("code space overflow: {0}")]
    CodeOverflow(String),

    #[error("removing the target symbol leaves no samples")]
    EmptyAfterRemoval,

    #[error("neuron system constraint violated: {0}")]
    Constraint(String),

    #[error("malformed input: {0}")]
    Input(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
