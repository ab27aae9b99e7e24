use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain `{0}` has not been validated")]
    ValidationRequired(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {0} is not in the domain")]
    OutsideDomain(Complex64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("accuracy {achieved:.3e} worse than required {required:.3e}: {detail}")]
    Accuracy {
        achieved: f64,
        required: f64,
        detail: String,
    },

    #[error("no density method available for domain `{0}`; compute a metric field first")]
    NeedsField(String),

    #[error("solver did not converge: {message}")]
    Solver {
        message: String,
        residual_history: Vec<f64>,
    },

    #[error("grid resolution error: {0}")]
    Resolution(String),

    #[error("connectivity error: {0}")]
    Connectivity(String),

    #[error("convergence error: {0}")]
    Convergence(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("metric accuracy error: {0}")]
    MetricAccuracy(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
