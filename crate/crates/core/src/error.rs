use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Rotation angle too close to pi for a unique logarithm.
    #[error("ambiguous logarithm: rotation angle {angle} is within tolerance of pi")]
    AmbiguousLogarithm { angle: f64 },

    #[error("degenerate pair: {0}")]
    DegeneratePair(String),

    #[error("invalid density: m({at}) = {value} is not positive")]
    InvalidDensity { at: f64, value: f64 },

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("undefined normal at sample {index}: curvature {kappa} below threshold")]
    UndefinedNormal { index: usize, kappa: f64 },

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("degenerate ansatz: {0}")]
    DegenerateAnsatz(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Point left the domain of a cost functional (e.g. x2 <= 0 on the half-plane).
    #[error("outside domain: {0}")]
    Domain(String),

    #[error("validation error at row {row}, column {column}: {message}")]
    Validation {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
