use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsvtError {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid convention: {0}")]
    InvalidConvention(String),

    #[error("unsupported conversion: {0}")]
    UnsupportedConversion(String),

    #[error("parity violation: {0}")]
    Parity(String),

    #[error("degree cap {cap} exceeded while certifying {what}")]
    DegreeCapExceeded { what: String, cap: usize },

    #[error("certification failed: {0}")]
    CertificationFailed(String),

    #[error("target polynomial is not bounded by one (sup = {sup})")]
    TargetNotBounded { sup: f64 },

    #[error("phase solver did not converge (best residual {best_residual:e})")]
    NoConvergence { best_residual: f64 },

    #[error("root finder failed: {0}")]
    Convergence(String),

    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("scale {alpha} is smaller than the operator norm {norm}")]
    ScaleTooSmall { alpha: f64, norm: f64 },

    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("matrix is not an orthogonal projector (defect {defect:e})")]
    NotProjector { defect: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical overflow guard tripped: {0}")]
    OverflowGuard(String),

    #[error("algorithm precondition violated: {0}")]
    ConditionViolated(String),

    #[error("order not found after {attempts} attempts")]
    OrderNotFound { attempts: usize },

    #[error("gave up after {iterations} iterations")]
    GiveUp { iterations: usize },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, QsvtError>;

impl From<serde_json::Error> for QsvtError {
    fn from(e: serde_json::Error) -> Self {
        QsvtError::Serialization(e.to_string())
    }
}
