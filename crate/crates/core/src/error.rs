use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite input: {0}")]
    NonFinite(String),
    #[error("integrator failure: {0}")]
    Integrator(String),
    #[error("fit failure: {0}")]
    Fit(String),
    #[error("calibration failure: {0}")]
    Calibration(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    /// Some points of a grid failed; `failed` holds their flat indices.
    #[error("{message} (failed points: {failed:?})")]
    Partial { message: String, failed: Vec<usize> },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "invalid_dimension",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonFinite(_) => "non_finite",
            Error::Integrator(_) => "integrator_failure",
            Error::Fit(_) => "fit_failure",
            Error::Calibration(_) => "calibration_failure",
            Error::Config(_) => "config_error",
            Error::Format(_) => "format_error",
            Error::Partial { .. } => "partial_result",
            Error::Io(_) => "io_error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{name} = {x}")))
    }
}

pub(crate) fn ensure_positive(name: &str, x: f64) -> Result<()> {
    ensure_finite(name, x)?;
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}
