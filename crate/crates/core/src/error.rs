use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("grid size {m}^{d} overflows the exact index type")]
    GridOverflow { m: u64, d: usize },

    #[error("index {index} out of range for grid of {n} points")]
    IndexOutOfRange { index: u128, n: u128 },

    /// Full enumeration refused: the worst-case grid grows exponentially in the
    /// truncation dimension.
    #[error("refusing to enumerate n = {n} points (cap {cap})")]
    EnumerationCap { n: u128, cap: u128 },

    #[error("statevector of {required} amplitudes exceeds memory cap {cap}; use the analytic distribution mode")]
    MemoryCap { required: u128, cap: u128 },

    #[error("bound violation at index {index} (point {point}): |{value}| > {bound}")]
    BoundViolation {
        index: u128,
        point: String,
        value: f64,
        bound: f64,
    },

    #[error("no exact grid mean available: {0}")]
    NoExactMean(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidConfig(_) => "invalid_config",
            Error::GridOverflow { .. } => "grid_overflow",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::EnumerationCap { .. } => "enumeration_cap",
            Error::MemoryCap { .. } => "memory_cap",
            Error::BoundViolation { .. } => "bound_violation",
            Error::NoExactMean(_) => "no_exact_mean",
            Error::Json(_) => "json",
        }
    }
}
