use thiserror::Error;

/// Errors produced by the library. The CLI maps each variant to an exit code.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus {0} is not a supported prime")]
    InvalidModulus(u32),

    #[error("invalid length {0}: n must be at least 1")]
    InvalidLength(usize),

    #[error("ambient mismatch: F_{}^{} vs F_{}^{}", .left.0, .left.1, .right.0, .right.1)]
    AmbientMismatch { left: (u8, usize), right: (u8, usize) },

    #[error("malformed literal {literal:?}: {reason}")]
    MalformedLiteral { literal: String, reason: String },

    #[error("index multiplier {multiplier} is not coprime to n = {n}")]
    NotCoprime { multiplier: i64, n: usize },

    #[error("operation requires q = 2, got q = {0}")]
    RequiresBinary(u8),

    #[error("rows are linearly dependent")]
    DependentRows,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("budget exceeded: {needed} map entries needed, cap is {cap}")]
    BudgetExceeded { needed: u128, cap: u64 },

    #[error("cache version mismatch: found {found}, expected {expected}")]
    CacheVersion { found: u32, expected: u32 },

    #[error("cache conflict for {key}: {detail}")]
    CacheConflict { key: String, detail: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
