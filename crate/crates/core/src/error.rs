use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical routines.
///
/// Every variant names the precondition or geometric constraint that failed so
/// callers (the CLI in particular) can surface it without further context.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("mixed unit conventions: expected {expected}, got {found}")]
    MixedConventions {
        expected: &'static str,
        found: &'static str,
    },

    #[error("non-finite potential value at r = {r}")]
    NonFinitePotential { r: f64 },

    #[error("r_max = {r_max} does not exceed the potential range {range}")]
    GridTooShort { r_max: f64, range: f64 },

    #[error("fit window [{lo}, {hi}] is not outside the potential range {range}")]
    FitWindowInsideRange { lo: f64, hi: f64, range: f64 },

    #[error("derivative of the scattering solution vanishes on the fit window")]
    VanishingDerivative,

    #[error("no logarithmic growth in the two-dimensional scattering solution")]
    NoLogarithm,

    #[error("Born integral diverges: {0}")]
    DivergentBorn(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("quadrature failed to reach tolerance (estimate {error:e}, requested {requested:e})")]
    Quadrature { error: f64, requested: f64 },

    #[error("formula outside its validity range: {0}")]
    OutOfRange(String),

    #[error("inadmissible geometry: {0}")]
    Inadmissible(String),

    #[error("soft potential violates its normalization: integral = {integral}")]
    Normalization { integral: f64 },

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("optimizer did not converge; best objective {best}")]
    NonConvergence { best: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

/// Reject non-finite or non-positive values.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {value}")))
    }
}
