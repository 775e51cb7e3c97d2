//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by density construction, transformation, and functionals.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("scale factor must be nonzero (c = 0 gives a degenerate distribution)")]
    DegenerateScale,

    #[error("lambda must lie in [0, 1], got {0}")]
    LambdaOutOfRange(f64),

    #[error("t must be {expected}, got {got}")]
    BadChannelParameter { expected: &'static str, got: f64 },

    #[error(
        "score undefined: density is not differentiable on its grid support; \
         pre-smooth with gaussian_smooth or request smoothing extrapolation"
    )]
    ScoreUndefined,

    #[error("grid resolution overflow: operation needs {required} points, maximum is {max}")]
    ResolutionOverflow { required: usize, max: usize },

    #[error("observation y = {y} is out of support: posterior mass underflowed")]
    OutOfSupportObservation { y: f64 },

    #[error("derivative step dt = {dt} too large relative to t = {t}")]
    DtTooLarge { dt: f64, t: f64 },

    #[error("no closed form for quantity `{quantity}` of family `{family}`")]
    Unsupported { family: String, quantity: String },

    #[error("mass drifted to {mass} during a transform; grid is numerically unsound")]
    MassDrift { mass: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
