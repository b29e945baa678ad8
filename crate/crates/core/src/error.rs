use thiserror::Error;

/// Errors raised by the numerical and topological routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("evaluation failed: {0}")]
    EvaluationFailure(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("rotation is not near the identity (rotor scalar part {scalar:.3e})")]
    NotNearIdentity { scalar: f64 },

    #[error("matrix is not special orthogonal (orthogonality defect {defect:.3e}, det {det:.3})")]
    NotOrthogonal { defect: f64, det: f64 },

    #[error("refinement exhausted between parameters {from} and {to}")]
    RefinementExhausted { from: f64, to: f64 },

    #[error("lift does not close on +1 or -1 (distances {to_plus:.3e}, {to_minus:.3e})")]
    LiftInconsistent { to_plus: f64, to_minus: f64 },

    #[error("frame at sample {sample} has negative orientation")]
    OrientationMismatch { sample: usize },

    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),

    #[error("twisting needs at least 2 framing fields, got {0}")]
    TooFewFields(usize),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("curve did not close after {steps} steps")]
    NotClosed { steps: usize },

    #[error("singular Jacobian: {0}")]
    Singular(String),

    #[error("seeds {first} and {second} trace the same component")]
    DuplicateComponent { first: usize, second: usize },

    #[error("section is not transverse: {0}")]
    NonTransverse(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed ({invariant}): {detail}")]
    Validation { invariant: String, detail: String },
}

impl Error {
    pub(crate) fn validation(invariant: &str, detail: impl Into<String>) -> Self {
        Error::Validation {
            invariant: invariant.to_string(),
            detail: detail.into(),
        }
    }

    /// Coarse classification used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_)
            | Error::Validation { .. }
            | Error::OrientationMismatch { .. }
            | Error::AmbientMismatch(_)
            | Error::TooFewFields(_)
            | Error::DimensionMismatch { .. } => ErrorKind::Input,
            Error::UnknownScenario(_) => ErrorKind::UnknownScenario,
            _ => ErrorKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
    UnknownScenario,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
