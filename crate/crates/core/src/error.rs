use thiserror::Error;

/// Errors raised by the MBM model, channel and detector layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MbmError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("expected {expected} bits, got {actual}")]
    BitCount { expected: usize, actual: usize },

    #[error("the all-zero initialization symbol cannot be decoded")]
    ZeroSymbol,

    #[error("symbol index out of range: {0}")]
    SymbolOutOfRange(String),

    #[error("joint signal set size overflows: ({per_user})^{users}")]
    SizeOverflow { per_user: u64, users: usize },

    #[error("degenerate channel: user {user}, map {map} has a zero-norm column")]
    DegenerateChannel { user: usize, map: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("exhaustive search space of {size} candidates exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u128 },

    #[error("regularized Gram matrix is singular")]
    SingularGram,

    #[error("invalid list size K={k}: must satisfy 1 <= K <= M={maps}")]
    InvalidListSize { k: usize, maps: usize },

    #[error("flop instrumentation was disabled for this run")]
    InstrumentationDisabled,

    #[error("target BER {target:e} is outside the range of a curve")]
    TargetOutOfRange { target: f64 },

    #[error("malformed channel dump: {0}")]
    MalformedDump(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

pub type Result<T, E = MbmError> = std::result::Result<T, E>;
