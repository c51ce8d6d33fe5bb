use thiserror::Error;

/// Errors raised by the reconstruction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {n} outside the band {lo}..={hi}")]
    OutOfBand { n: i64, lo: i64, hi: i64 },

    #[error("channel matrix is singular at n = {n} (condition number {cond:.3e})")]
    SingularScheme { n: i64, cond: f64 },

    #[error("normal equations are singular (condition number {cond:.3e}): {context}")]
    SingularSystem { cond: f64, context: String },

    #[error("output size {n_out} is smaller than the sample count {ns}")]
    InvalidOutputSize { n_out: usize, ns: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Validation failures (bad input) versus numeric failures (singular
    /// systems). The CLI maps these onto distinct exit codes.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SingularScheme { .. } | Error::SingularSystem { .. } | Error::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
