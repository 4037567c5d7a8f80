use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("noiseless configuration (W = J = 0) with t > 0 and nonzero transmissivity")]
    Noiseless,

    #[error("no residue construction exists for n = {0}")]
    NoResidueFamily(usize),

    #[error("residue family p = {p}, e = {e} is not spectrally flat (spread {spread:.3e})")]
    NotFlat { p: u64, e: u32, spread: f64 },

    #[error("waterfilling has no frequency with positive prior to receive power")]
    NowhereToPour,

    #[error("certificate failed after {restarts} restarts: {reason}")]
    CertificateFailed { restarts: usize, reason: String },

    #[error("size cap exceeded: n = {n} > {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
