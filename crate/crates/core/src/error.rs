use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigenvalue {index} is {value:e}, expected a positive value")]
    NonPositiveEigenvalue { index: usize, value: f64 },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("label {label} out of range for K = {k}")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("cluster {0} has no members")]
    MissingCluster(usize),

    #[error("all candidate points coincide; no sampling mass left")]
    ZeroSamplingMass,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("probability {value} at ({i}, {j}) outside [0, 1]")]
    InvalidProbability { i: usize, j: usize, value: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
