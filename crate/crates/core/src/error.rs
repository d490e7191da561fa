use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode ({from},{to}) is not present in the field realization")]
    MissingMode { from: usize, to: usize },
    #[error("invalid mode ({0},{0}): a mode connects two distinct levels")]
    DegenerateMode(usize),
    #[error("empty mode set")]
    EmptyModeSet,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension must be at least {min}, got {found}")]
    DimensionTooSmall { min: usize, found: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("level index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("levels must differ (got n = m = {0})")]
    SameLevel(usize),
    #[error("phase parameter {0} is not an integer")]
    NonIntegerZeta(String),
    #[error("phase parameters mix integer and half-odd-integer values")]
    MixedParity,
    #[error("empty list")]
    EmptyList,
    #[error("negative maximum phase parameter {0}")]
    NegativeUpsilon(String),
    #[error("{0} is not a half-odd-integer")]
    NotHalfOdd(String),
    #[error("too few samples: need at least {min}, got {found}")]
    TooFewSamples { min: usize, found: usize },
    #[error("state vanishes identically: both particles carry label {0} with odd exchange sign")]
    VanishingState(String),
    #[error("imaginary residual {0:e} exceeds tolerance")]
    ImaginaryResidual(f64),
    #[error("invalid level system: {0}")]
    InvalidSystem(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
