use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{value} is not a probability")]
    NotAProbability { value: f64 },

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate}, error bound {error_bound})")]
    Convergence {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("gamma must satisfy 1 <= gamma <= {s}, got {gamma}")]
    GammaOutOfRange { gamma: usize, s: usize },

    #[error("indeterminate statistic: {0}")]
    Indeterminate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
