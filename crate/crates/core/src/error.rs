use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} is too small (need at least 2)")]
    DimensionTooSmall(usize),
    #[error("dimension {d} exceeds the enumeration cap {cap}")]
    DimensionTooLarge { d: usize, cap: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("parameter s must have unit modulus (|s| = {0})")]
    NotUnitModulus(f64),
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("invalid spin {0}: need s >= 1/2 with 2s integral")]
    InvalidSpin(f64),
    #[error("spin {0} exceeds the supported maximum of 10")]
    SpinTooLarge(f64),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("subspace is empty")]
    EmptySubspace,
    #[error("invalid factorization d={d}, p={p}, q={q}, m={m}, s={s}")]
    InvalidFactorization { d: usize, p: usize, q: usize, m: usize, s: usize },
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
