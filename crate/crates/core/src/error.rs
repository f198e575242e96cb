use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{name} out of range: {value}")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("kind mismatch: {0}")]
    KindMismatch(String),
    #[error("PPT criterion is not sufficient for d_A*d_B = {0} > 6; use a hull oracle")]
    CriterionInsufficient(usize),
    #[error("linear program infeasible")]
    Infeasible,
    #[error("linear program did not converge within {0} iterations")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("problem too large: {0}")]
    SizeLimit(String),
    #[error("missing alpha feature on record {0}")]
    MissingAlpha(usize),
    #[error("missing label on record {0}")]
    MissingLabel(usize),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("malformed {format} data: {reason}")]
    Format {
        format: &'static str,
        reason: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Infeasible | Error::IterationLimit(_) | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
