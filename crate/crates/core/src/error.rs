use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed continued-fraction word: {0}")]
    MalformedWord(String),
    #[error("cannot extend {word} by {entry}")]
    InvalidExtension { word: String, entry: i64 },
    #[error("{0} is not in the open unit interval")]
    NotInUnitInterval(f64),
    #[error("the slope of {0} is infinite")]
    InfiniteSlope(String),
    #[error("unsupported value: {0}")]
    UnsupportedValue(String),
    #[error("period length {len} exceeds the limit {limit}")]
    PeriodTooLong { len: u64, limit: u64 },
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("no sign change of t -/+ 2 on [{0}, {1}]")]
    NoSignChange(f64, f64),
    #[error("ambiguous backward type: {0}")]
    TypeAmbiguous(String),
    #[error("structure violation: {0}")]
    StructureViolation(String),
    #[error("cover violation: {0}")]
    CoverViolation(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid mu sequence: {0}")]
    InvalidMu(String),
    #[error("energy {0} is within tolerance of a band edge")]
    EdgeCollision(f64),
    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),
    #[error("gap certificate failed: {0}")]
    CertificateFailure(String),
    #[error("enumeration of {0} codes exceeds the limit")]
    TooManyCodes(u64),
    #[error("route mismatch: {0}")]
    RouteMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
