use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grade overflow: {left} + {right} exceeds dimension {n}")]
    GradeOverflow { left: usize, right: usize, n: usize },

    #[error("grade mismatch: expected grade {expected}, found {found}")]
    GradeMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (supported range is 2..=16)")]
    UnsupportedDimension(usize),

    #[error("linear system has no solution")]
    NoSolution,

    #[error("Hörmander condition violated: brackets span only {span} of {dim_v2} dimensions of V2")]
    HormanderViolation { span: usize, dim_v2: usize },

    #[error("ideal condition violated: {0}")]
    NotAnIdeal(String),

    #[error("quotient has trivial second layer V2")]
    TrivialV2,

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("division hypothesis fails at theta = {theta}: theta ^ image(theta) != 0")]
    HypothesisFailed { theta: crate::exterior::KForm },

    #[error("division is inconsistent for index set {index}")]
    Inconsistent { index: String },

    #[error("samples do not determine the coefficient form ({null_dim} free directions)")]
    UnderdeterminedSamples { null_dim: usize },

    #[error("samples are inconsistent with any coefficient form")]
    InconsistentSamples,

    #[error("form is not a member of the required subspace: {0}")]
    NotInSubspace(String),

    #[error("parse error: {0}")]
    Parse(String),
}
