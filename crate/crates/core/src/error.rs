use thiserror::Error;

/// Errors raised by the estimation and testing pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge (estimate {estimate}, error bound {error})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("singular local design at t = {t} (bandwidth {bandwidth})")]
    SingularDesign { t: f64, bandwidth: f64 },

    #[error("no candidate bandwidth produced a nonsingular fit on every fold")]
    NoValidBandwidth,

    #[error("block length {m} too large for series of length {n}")]
    BlockTooLarge { m: usize, n: usize },

    #[error("inflated bandwidth {0} is not below 1/2")]
    BandwidthOverflow(f64),

    #[error("probability {0} outside (0, 1)")]
    InvalidProbability(f64),

    #[error("margin delta_n = {delta_n} must lie in (0, {delta})")]
    InvalidMargin { delta_n: f64, delta: f64 },

    #[error("local long-run variance hit the positivity floor at t = {0}")]
    DegenerateVariance(f64),

    #[error("series has {got} observations, at least {need} required")]
    TooFewObservations { got: usize, need: usize },

    #[error("non-finite observation at position {0}")]
    NonFinite(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
