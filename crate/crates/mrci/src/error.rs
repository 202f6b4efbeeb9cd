use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("probabilities sum to {sum}, expected 1 (tolerance {tol})")]
    ProbSum { sum: f64, tol: f64 },
    #[error("negative probability {0}")]
    NegativeProb(f64),
    #[error("empty support after dropping zero-probability outcomes")]
    EmptySupport,
    #[error("invalid rule id: {0}")]
    InvalidRule(String),
    #[error("rule {0} is an attention rule and cannot be scored")]
    AttentionRule(String),
    #[error("assignment is not admissible at observation {0}")]
    InadmissibleAssignment(usize),
    #[error("counts sum to {got}, expected {expected}")]
    CountSumMismatch { got: u64, expected: u64 },
    #[error("cap {0} outside [0.5, 1]")]
    CapOutOfRange(f64),
    #[error("value {0} outside (0, 1]")]
    OutOfUnitInterval(f64),
    #[error("malformed record at line {line}: {msg}")]
    MalformedRecord { line: usize, msg: String },
    #[error("missing required column(s): {0}")]
    MissingColumns(String),
    #[error("no records in input")]
    NoRecords,
    #[error("{count} CPC18 row(s) have a non-trivial lottery shape; expansion is not supported")]
    UnsupportedLotShape { count: usize },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 for I/O-level failures, 1 for validation errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            Error::Csv(e) if e.is_io_error() => 2,
            _ => 1,
        }
    }
}
