use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state {0}")]
    InvalidState(String),

    #[error("generator {generator} is not available on {space}")]
    UnsupportedGenerator {
        generator: &'static str,
        space: &'static str,
    },

    #[error("invalid step measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("insufficient range: {0}")]
    InsufficientRange(String),

    #[error("truncation error {error:.3e} exceeds 10% of value {value:.3e} at m = {m}")]
    TruncationTooLarge { m: u64, value: f64, error: f64 },

    #[error("first-visit equivalence mismatch at k = {k}: product route {product}, augmented route {augmented}")]
    EquivalenceMismatch {
        k: usize,
        product: String,
        augmented: String,
    },

    #[error("singular linear system")]
    Singular,

    #[error("cache file {path} is corrupted ({reason}); delete it and rerun")]
    CacheCorrupted { path: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
