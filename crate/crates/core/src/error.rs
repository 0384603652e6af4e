use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("no convergence within budget (best value {best:.6e})")]
    NoConvergence { best: f64 },

    #[error("ill-conditioned Newton system (smallest/largest singular value {ratio:.3e})")]
    IllConditioned { ratio: f64 },

    #[error(
        "invalid qubit positions {positions:?} for a register of {n} qubits and gate arity {arity}"
    )]
    BadPositions {
        positions: Vec<usize>,
        n: usize,
        arity: usize,
    },

    #[error("principal logarithm is ambiguous; eigenvalues near -1: {eigenvalues:?}")]
    BranchAmbiguity { eigenvalues: Vec<(f64, f64)> },

    #[error("atom {atom} is not part of cell {cell}")]
    AtomNotInCell { atom: usize, cell: String },

    #[error("no control schedule for gate `{gate}` on cell {cell}")]
    MissingSchedule { gate: String, cell: String },

    #[error("invalid cell parameters: {0}")]
    InvalidParams(String),

    #[error("unknown or malformed gate name `{0}`")]
    UnknownGate(String),

    #[error("cell parameter hash mismatch (expected {expected}, found {found})")]
    HashMismatch { expected: String, found: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
