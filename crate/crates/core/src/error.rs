use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("unsupported Sobolev index: {0}")]
    UnsupportedIndex(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} outside the protocol span [0, {span}]")]
    OutOfRange { t: f64, span: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("index error: {0}")]
    Index(String),

    #[error("alignment error: start indices {0} and {1} differ")]
    Alignment(u64, u64),

    #[error("infeasible cube placement: {0}")]
    InfeasiblePlacement(String),

    #[error("construction inapplicable, W^{{r,p}} embeds in Lipschitz: p = {p} >= d/(r-1) = {bound}")]
    LipschitzEmbedding { p: f64, bound: f64 },

    #[error("unsupported schedule: {0}")]
    UnsupportedSchedule(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
