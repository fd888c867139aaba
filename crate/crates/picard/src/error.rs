use thiserror::Error;

/// Errors produced by lattice and cone operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: classes live on {0} and {1} points")]
    DimensionMismatch(usize, usize),

    #[error("index {index} out of range for a lattice on {s} points")]
    IndexOutOfRange { index: usize, s: usize },

    #[error("quadratic move indices must be pairwise distinct: ({0}, {1}, {2})")]
    RepeatedIndices(usize, usize, usize),

    #[error("permutation {0:?} is not a bijection of 1..={1}")]
    InvalidPermutation(Vec<usize>, usize),

    #[error("the zero class has no associated ray")]
    ZeroClass,

    #[error("class is not integral: {0}")]
    NotIntegral(String),

    #[error("class does not lie on the quadric cone (need L^2 = K.L = 0 and degree >= 0)")]
    NotOnQperp,

    #[error("invalid sampling direction: {0}")]
    InvalidDirection(String),

    #[error("need at least {needed} points, got s = {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("cannot uncollide slot {index}: multiplicity is {reason}")]
    BadUncollisionSlot { index: usize, reason: String },

    #[error("uncollision factor must be at least 2, got {0}")]
    BadUncollisionFactor(usize),

    #[error("class is not certified nef, cannot build a good-ray certificate")]
    NotCertifiedNef,

    #[error("certificate replay failed: {0}")]
    ReplayFailed(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("linear system has rank {got}, expected {expected}")]
    UnexpectedRank { got: usize, expected: usize },

    #[error("Gram matrix on the K-orthogonal slice is not negative definite (minor {minor} has the wrong sign)")]
    NotNegativeDefinite { minor: usize },

    #[error("search budget of {0} candidates exhausted without a de Fernex negative ray")]
    BudgetExhausted(u64),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
