use thiserror::Error;

/// Failures of the numerical core. Model-assumption violations are data,
/// see [`crate::model::validate_model`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid needs at least 2 age intervals, got {0}")]
    TooFewAgeIntervals(usize),

    #[error("horizon {horizon} must exceed the initial time {t0}")]
    EmptyHorizon { t0: f64, horizon: f64 },

    #[error("shape mismatch for {what}: expected {expected}, got {got}")]
    Shape {
        what: &'static str,
        expected: String,
        got: String,
    },

    #[error("no a-priori tail bound: {0}")]
    NoTailBound(&'static str),

    #[error("control infeasible at time step {step}")]
    Infeasible { step: usize },

    #[error("no closed-form gradient map: {0}")]
    NoClosedForm(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(what: &'static str, expected: impl ToString, got: impl ToString) -> Error {
    Error::Shape {
        what,
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
