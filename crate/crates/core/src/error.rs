use thiserror::Error;

/// Errors produced by the numeric and combinatorial kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root finding did not certify: max radius {max_radius:e} exceeds tol {tol:e} after {iterations} iterations (residual {residual:e})")]
    RootCertification {
        max_radius: f64,
        tol: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("sup-norm refinement failed to certify within budget: {0}")]
    SupNormCertification(String),

    #[error("cap exceeded: {what} = {value} is above the configured cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("test function undefined at atom {0}")]
    UndefinedAtAtom(String),

    #[error(
        "measure not supported on the unit circle: atom {atom} has |z| deviating by {deviation:e}"
    )]
    OffCircle { atom: String, deviation: f64 },

    #[error("non-Hermitian moment data: {0}")]
    NonHermitianMoments(String),

    #[error("base height sequence does not converge (window oscillation {oscillation:e} > tol {tol:e}); the criterion's hypothesis fails")]
    NonConvergentBase { oscillation: f64, tol: f64 },

    #[error("verdict is {verdict}, refusing to extract a limit measure")]
    NoLimitMeasure { verdict: String },

    #[error("{0}")]
    Semigroup(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("configuration cap exceeded: {0}")]
    ConfigCap(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
