use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("hermiticity defect {defect:e} exceeds tolerance {tol:e}")]
    HermDefectTooLarge { defect: f64, tol: f64 },

    #[error("eigensolver did not converge (off-diagonal norm {off_diag:e})")]
    ConvergenceFailure { off_diag: f64 },

    #[error("{what} is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { what: String, min_eig: f64 },

    #[error("operator is zero")]
    ZeroOperator,

    #[error("projector is zero")]
    ZeroProjector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("{what} has trace {trace}, expected 1")]
    BadTrace { what: String, trace: f64 },

    #[error("prior p_rho = {0} must lie strictly inside (0, 1)")]
    BadPrior(f64),

    #[error("rank {rank} is invalid for dimension {dim}")]
    BadRank { dim: usize, rank: usize },

    #[error("lambda_rho + lambda_sigma exceeds the identity (max eigenvalue {max_eig})")]
    SumExceedsIdentity { max_eig: f64 },

    #[error("states have different supports")]
    UnequalSupports,

    #[error("states have equal supports")]
    EqualSupports,

    #[error("parameters are for {requested} but the instance is {actual}")]
    CaseMismatch { requested: String, actual: String },

    #[error("c = {c} exceeds its bound {bound}")]
    CBoundViolated { c: f64, bound: f64 },

    #[error("c = {0} must be strictly positive")]
    NonPositiveC(f64),

    #[error("{what} lies outside its required subspace (residual {residual:e})")]
    MembershipViolated { what: String, residual: f64 },

    #[error("set {set} is empty when the support relation is {relation}")]
    SetEmptyForSupports { set: String, relation: String },

    #[error("{what} has zero overlap with the state it must detect")]
    ZeroOverlap { what: String },

    #[error("extremal subspaces coincide; use the degenerate single-subspace form")]
    Degenerate,

    #[error("instance is not degenerate; the single-subspace form does not apply")]
    NotDegenerate,

    #[error("projectors are not orthogonal (Tr(P1 P2) = {overlap:e})")]
    ProjectorsNotOrthogonal { overlap: f64 },

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
