use thiserror::Error;

/// Errors raised across the library. Contract violations carry the offending
/// values so a failing experiment can be replayed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for sample size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("enumeration cap exceeded: {what} is {value}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("functional evaluation failed ({context}): {source}")]
    Evaluation {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite functional output (replicate seed {seed:#018x})")]
    NonFinite { seed: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("covariance is not positive definite (min eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("functional is not marked symmetric; the B_n bound requires a symmetric statistic")]
    NotSymmetric,

    #[error("unsupported dimension {0}; geometry kernels cover d = 1 and d = 2")]
    UnsupportedDimension(usize),

    #[error("degenerate configuration: Gauss-Bonnet residual {residual:e} (scene seed {seed:?})")]
    DegenerateConfiguration { residual: f64, seed: Option<u64> },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("config validation failed:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),

    #[error("selftest failure: {0}")]
    SelftestFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Wraps an evaluation failure with the operator context it occurred in.
    pub fn in_context(self, context: impl Into<String>) -> Self {
        Error::Evaluation {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
