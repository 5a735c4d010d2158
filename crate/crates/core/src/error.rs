use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("subsystem label `{0}` appears in both operands")]
    LabelCollision(String),
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("invalid subsystem permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("partial trace needs at least one subsystem to keep")]
    EmptyKeep,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("state norm deviates from 1 by {0:e}")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace deviates from 1 by {0:e}")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("invalid Bell index (d={d}, m={m}, n={n})")]
    InvalidBellIndex { d: usize, m: usize, n: usize },
    #[error("invalid resource: {0}")]
    InvalidResource(String),
    #[error("state is not bipartite between parties A and B: {0}")]
    NotBipartite(String),
    #[error("subsystems {0} and {1} are not held by the same party")]
    NotCoLocated(String, String),
    #[error("subsystems {0} and {1} have unequal dimensions")]
    UnequalDims(String, String),
    #[error("transcript violates LOCC bookkeeping: {0}")]
    Transcript(String),
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("unsupported dimension d={0}")]
    UnsupportedDimension(usize),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("malformed state file: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
