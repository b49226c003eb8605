use thiserror::Error;

/// Errors raised by construction, checking, restriction and matching of covector systems.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum VeeError {
    #[error("zero covector (all coordinates below {eps:e} in absolute value)")]
    ZeroCovector { eps: f64 },

    #[error("degenerate Gram form: rank {rank} < dimension {dim}")]
    DegenerateForm { rank: usize, dim: usize },

    #[error("Gram form is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    IndefiniteForm { min_eigenvalue: f64 },

    #[error("no regular point found after {attempts} draws with margin {eps_regular}")]
    SamplingExhausted { attempts: usize, eps_regular: f64 },

    #[error("invalid system spec: {0}")]
    InvalidSpec(String),

    #[error("point is singular: covector #{index} evaluates to {value:e}")]
    SingularPoint { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("restriction subspace is zero: the subsystem spans the whole dual space")]
    EmptySubspace,

    #[error("restriction is empty: every remaining covector vanishes on the subspace")]
    EmptyRestriction,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, VeeError>;
