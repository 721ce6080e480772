use thiserror::Error;

/// Errors raised by graph construction, condition handling, assembly and control.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("grid does not match graph: {0}")]
    GridMismatch(String),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid vertex conditions: {0}")]
    InvalidConditions(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("breakpoint at t = {0} lies strictly inside the step")]
    BreakpointInsideStep(f64),
    #[error("norm drift {drift:.3e} exceeds the hard limit at step {step}")]
    NormDrift { drift: f64, step: usize },
    #[error("Hamiltonian families do not match: {0}")]
    FamilyMismatch(String),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("graph admits no simple potential direction (vertex residuals {0:?})")]
    NotSimple(Vec<(String, f64)>),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
