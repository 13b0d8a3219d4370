//! Crate-wide error type with process exit-code mapping.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input fails a structural or domain precondition.
    #[error("validation: {0}")]
    Validation(String),

    /// The coupling matrix is numerically singular.
    #[error("matrix a not invertible (min |eigenvalue| = {min_abs:.3e})")]
    SingularCoupling { min_abs: f64 },

    /// A matrix-function argument is too large for f64 evaluation.
    #[error("matrix function argument out of range (norm = {norm:.3e})")]
    Range { norm: f64 },

    /// Eigenvalue iteration failed to converge.
    #[error("eigenvalue iteration did not converge")]
    EigenConvergence,

    /// Evaluation attempted at (or too close to) a pole of the resolvent.
    #[error("lambda too close to a resonance (|det W| = {det_abs:.3e})")]
    PoleProximity { det_abs: f64 },

    /// A quadrature self-estimate exceeded its accuracy target.
    #[error("grid too coarse: quadrature self-estimate {estimate:.3e} exceeds {tol:.3e}")]
    GridTooCoarse { estimate: f64, tol: f64 },

    /// A counting contour passes too close to a zero.
    #[error("contour passes within {min_abs:.3e} of a zero")]
    ContourTooClose { min_abs: f64 },

    /// Accumulated winding stayed too far from an integer.
    #[error("winding number {value:.6} not within 0.1 of an integer")]
    NonIntegerWinding { value: f64 },

    /// Root search could not certify completeness.
    #[error("incomplete root search: contour count {expected} vs {found} roots found")]
    Incomplete { expected: i64, found: i64 },

    /// A verification check exceeded its tolerance.
    #[error("verification failed: {check} = {value:.3e} exceeds {tol:.3e}")]
    ToleranceExceeded {
        check: &'static str,
        value: f64,
        tol: f64,
    },

    /// An operation was asked for outside its mathematical domain.
    #[error("domain: {0}")]
    Domain(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 validation, 3 incompleteness,
    /// 4 numerical range trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::SingularCoupling { .. }
            | Error::Domain(_)
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Incomplete { .. } | Error::NonIntegerWinding { .. } => 3,
            Error::Range { .. }
            | Error::EigenConvergence
            | Error::PoleProximity { .. }
            | Error::GridTooCoarse { .. }
            | Error::ContourTooClose { .. }
            | Error::ToleranceExceeded { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
