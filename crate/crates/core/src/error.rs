use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. `code()` gives a stable integer for
/// the CLI and the C interface.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no convergence after {iterations} iterations (last change {last_change:.3e})")]
    Convergence {
        iterations: usize,
        last_change: f64,
        trace: Vec<f64>,
    },

    #[error("singular map at ({re:.6}, {im:.6}): {what}")]
    Singularity { re: f64, im: f64, what: String },

    #[error("reflection symmetry residual {residual:.3e} exceeds {limit:.1e}")]
    Symmetry { residual: f64, limit: f64 },

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("subdivision step {step} has sup norm {norm:.4} >= {limit:.4}; use more steps")]
    Subdivision { step: usize, norm: f64, limit: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn code(&self) -> i32 {
        match self {
            Error::Domain(_) => 10,
            Error::Validation(_) => 11,
            Error::Unsupported(_) => 12,
            Error::Precondition(_) => 13,
            Error::Convergence { .. } => 14,
            Error::Singularity { .. } => 15,
            Error::Symmetry { .. } => 16,
            Error::Accuracy(_) => 17,
            Error::Subdivision { .. } => 18,
            Error::Config(_) => 19,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 20,
        }
    }

    pub(crate) fn singular(z: num_complex::Complex64, what: impl Into<String>) -> Self {
        Error::Singularity {
            re: z.re,
            im: z.im,
            what: what.into(),
        }
    }
}
