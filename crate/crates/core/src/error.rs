use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("invalid grade range (r={r}, p={p}, q={q}) for m={m}: need p <= q and r + 2q <= m")]
    InvalidRange {
        m: usize,
        r: usize,
        p: usize,
        q: usize,
    },

    #[error("index {index} out of range 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },

    #[error("form has mixed grades {0:?}; a single grade is required")]
    MixedGrade(Vec<usize>),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),

    #[error("subspace is not contained in the enclosing space")]
    NotContained,

    #[error("NotClosed: d f != 0")]
    NotClosed,

    #[error("NotCoclosed: d* f != 0")]
    NotCoclosed,

    #[error("NotInMT: form is not a solution of (d + d*) f = 0 on the grade range")]
    NotInMT,

    #[error("ComponentNotHodge: tuple component {index} fails d = 0 or d* = 0")]
    ComponentNotHodge { index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("ambient dimension {dim} exceeds cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal inconsistency (bug): {0}")]
    Internal(String),
}
