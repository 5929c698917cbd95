use thiserror::Error;

/// Errors reported by the numerical core.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid function spec: {0}")]
    InvalidFunction(String),

    #[error("invalid problem data: {0}")]
    InvalidProblem(String),

    #[error("non-integrable weight: {0}")]
    NonIntegrableWeight(String),

    #[error("certificate hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("certificate does not hold: {0}")]
    CertificateFailed(String),

    #[error("cone construction failed: {0}")]
    ConeConstruction(String),

    #[error("solver input invalid: {0}")]
    SolverInput(String),

    #[error("threshold search failed: {0}")]
    Threshold(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
