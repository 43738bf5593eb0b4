use thiserror::Error;

use crate::sequence::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0} (only 2 and 4 are supported)")]
    UnsupportedDimension(usize),
    #[error("state is not normalized (|norm^2 - 1| = {0:e})")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("density operator trace is {0}, expected 1")]
    TraceNotOne(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("negative duration {0} s")]
    NegativeDuration(f64),
    #[error("rotation angle {0} rad outside (-2pi, 2pi]")]
    AngleOutOfRange(f64),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("invalid expression: {0}")]
    InvalidExpression(String),
    #[error("non-unitary event (gradient crusher or dephasing) cannot act on a pure state or unitary; use a density operator")]
    NonUnitaryEvent,
    #[error("trajectory is not cyclic (reopening distance {distance:e})")]
    OpenTrajectory { distance: f64 },
    #[error("pulse on the passive spin leaves the computational basis (angle {0} rad)")]
    PassiveSpinPulse(f64),
    #[error("insufficient samples per event: {0} (need at least 8)")]
    InsufficientSamples(usize),
    #[error("quadrature did not converge (error estimate {0:e})")]
    QuadratureNotConverged(f64),
    #[error("loop is not closed (gap {0:e})")]
    OpenLoop(f64),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("cyclic states are not eigenvectors of the operator (deviation {0:e})")]
    NotEigenvector(f64),
    #[error("tomographic reconstruction is not positive (distance to nearest state {0:e})")]
    TomographyNotPositive(f64),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failed physics checks and fits, as opposed to bad input or
    /// I/O.
    pub fn is_check_failure(&self) -> bool {
        matches!(
            self,
            Error::CheckFailed(_)
                | Error::DegenerateFit(_)
                | Error::OpenTrajectory { .. }
                | Error::OpenLoop(_)
                | Error::NotEigenvector(_)
                | Error::TomographyNotPositive(_)
                | Error::QuadratureNotConverged(_)
        )
    }
}
