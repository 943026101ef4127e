use thiserror::Error;

/// Errors surfaced by the library. Precision shortfalls that can be
/// reported honestly as bounds are *not* errors; they travel through
/// [`crate::valuation::ExtValuation::LowerBound`] instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision loss: result known to 0 digits")]
    PrecisionLoss,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("insufficient depth: requested {requested}, materialized {materialized}")]
    InsufficientDepth { requested: usize, materialized: usize },
    #[error("insufficient horizon: need at least {min}, got {got}")]
    InsufficientHorizon { min: usize, got: usize },
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("window overflow: result support [{lo}, {hi}] exceeds the configured window")]
    WindowOverflow { lo: i64, hi: i64 },
    #[error("incompatible ring tags: {0} vs {1}")]
    IncompatibleTags(String, String),
    #[error("tail too short: need {need} materialized terms, got {got}")]
    TailTooShort { need: usize, got: usize },
    #[error("pole: lambda equals {0}, denominator vanishes")]
    Pole(i64),
    #[error("all horizon indices excluded")]
    AllExcluded,
    #[error("lambda hits integer {0} inside the window")]
    LambdaHitsInteger(i64),
    #[error("operation requires a dense scalar")]
    DenseRequired,
    #[error("operation requires a sparse scalar")]
    SparseRequired,
    #[error("conflicting evidence: both coadmissibility evidence and a divergence witness were produced")]
    ConflictingEvidence,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("mismatched primes: {0} vs {1}")]
    PrimeMismatch(u64, u64),
}

pub type Result<T> = std::result::Result<T, Error>;
