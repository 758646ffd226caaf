use thiserror::Error;

/// Errors raised by the mesh, quadrature, and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {x} lies outside the domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-finite integrand value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("integrand must be nonnegative, got {value} at x = {x}")]
    NegativeIntegrand { x: f64, value: f64 },

    #[error("density integrates to zero on [{a}, {b}]")]
    DegenerateDensity { a: f64, b: f64 },

    #[error("function is not admissible: {0}")]
    Inadmissible(String),

    #[error("state is infeasible: {0}")]
    Infeasible(String),

    #[error("not available: {0}")]
    NotAvailable(String),

    #[error("invalid comparison: {0}")]
    InvalidComparison(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("could not parse field spec {spec:?}: {reason}")]
    FieldSpec { spec: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by malformed user input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::FieldSpec { .. } | Error::Config(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
