use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the kernels can report. Variants map one-to-one onto the
/// exit-code catalog of the command-line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular geometry: {0}")]
    Singular(String),

    #[error("numerical error: {message} (achieved relative error {achieved:.3e})")]
    Numerical { message: String, achieved: f64 },

    #[error("discretization error: {0}")]
    Discretization(String),

    #[error("linear algebra error: {message} (condition estimate {condition:.3e})")]
    LinearAlgebra { message: String, condition: f64 },

    #[error("no levitation: {0}")]
    NoLevitation(String),

    #[error("no levitation onset below the critical temperature: {0}")]
    NoOnset(String),

    #[error("did not converge: {0}")]
    Convergence(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("inversion error: {message} (achievable range {min:.6e} .. {max:.6e} Hz)")]
    Inversion { message: String, min: f64, max: f64 },

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("no data: {0}")]
    NoData(String),

    #[error("fit error: {message}")]
    Fit {
        message: String,
        /// Best parameters reached before giving up, if any.
        best: Option<Vec<f64>>,
    },

    #[error("pipeline error: {0}")]
    Pipeline(String),

    #[error("parameter error: {0}")]
    Parameter(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
