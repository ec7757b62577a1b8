use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vectors and matrices must have positive dimension")]
    EmptyDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("eigen-solver did not converge after {iterations} iterations (off-diagonal residual {residual:.3e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },

    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("infeasible geometry for {who}: error radius {radius} is not below estimate norm {norm}")]
    InfeasibleGeometry { who: String, radius: f64, norm: f64 },

    #[error("estimates {first} and {second} are not orthogonal (normalized inner product {overlap:.3e})")]
    NonOrthogonal {
        first: String,
        second: String,
        overlap: f64,
    },

    #[error("{0}")]
    RankDeficient(String),

    #[error("at sweep value {value}: {source}")]
    AtSweepValue { value: f64, source: Box<Error> },

    #[error("self-check failed: {0}")]
    SelfCheck(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        if let Error::AtSweepValue { source, .. } = self {
            return source.is_validation();
        }
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::InfeasibleGeometry { .. }
                | Error::NonOrthogonal { .. }
                | Error::DimensionMismatch { .. }
                | Error::NotHermitian { .. }
                | Error::NotSquare { .. }
                | Error::EmptyDimension
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
