use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivisions. The best estimate is kept.
    #[error("quadrature did not converge: estimate {estimate}, error {error:e} > tolerance {tolerance:e}")]
    Accuracy {
        estimate: Complex64,
        error: f64,
        tolerance: f64,
    },

    #[error("numerical failure at t = {time}{}: {reason}", step.map(|s| format!(" (step {s})")).unwrap_or_default())]
    NumericalFailure {
        time: f64,
        step: Option<usize>,
        reason: String,
    },

    #[error("design infeasible: {0}")]
    Infeasible(String),

    #[error("time {t} outside schedule range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn failure(time: f64, reason: impl Into<String>) -> Self {
        Error::NumericalFailure {
            time,
            step: None,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
