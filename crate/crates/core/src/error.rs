use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode is evanescent at {frequency_hz} Hz (TE10 cutoff {cutoff_hz} Hz)")]
    Evanescent { frequency_hz: f64, cutoff_hz: f64 },

    #[error("waveguide is not single-mode at {frequency_hz} Hz (TE20 cutoff {te20_cutoff_hz} Hz)")]
    Multimode { frequency_hz: f64, te20_cutoff_hz: f64 },

    #[error("element {index} has zero polarizability; the interaction diagonal is singular")]
    SingularDiagonal { index: usize },

    #[error("interaction matrix is ill-conditioned (condition estimate {estimate:.3e})")]
    IllConditioned { estimate: f64 },

    #[error("directivity is undefined for an all-zero dipole distribution")]
    UndefinedDirectivity,

    #[error("channel calibration failed: {0}")]
    Calibration(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
