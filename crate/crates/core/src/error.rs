use thiserror::Error;

use crate::weyl::NevanlinnaSample;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("evaluation point must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("model formula undefined at t = {t}: {reason}")]
    ModelDomain { t: f64, reason: String },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("adaptive quadrature did not converge on [{a}, {b}] (estimated error {estimate:e})")]
    QuadratureFailure { a: f64, b: f64, estimate: f64 },
    #[error("model is not declared to be in the limit point case")]
    NotLimitPoint,
    #[error("reparameterisation map is not strictly increasing: {0}")]
    NotMonotone(String),
    #[error("step control underflowed at t = {t}")]
    StepFailure { t: f64 },
    #[error("degenerate Weyl disc: {0}")]
    DegenerateDisc(String),
    #[error("Weyl disc radius stalled at {:e} (T = {})", .0.err, .0.t_used)]
    NoConvergence(Box<NevanlinnaSample>),
    #[error("diagonal primitive vanishes at t = {t} (m1 = {m1}, m2 = {m2})")]
    ZeroDiagonalPrimitive { t: f64, m1: f64, m2: f64 },
    #[error("root bracket could not be established for target {target}")]
    BracketFailure { target: f64 },
    #[error("value out of range: {0}")]
    RangeError(String),
    #[error("model is not trace normalised at t = {t} (trace {trace})")]
    NotTraceNormalized { t: f64, trace: f64 },
    #[error("rescaling mode assumption violated: {0}")]
    ModeAssumptionViolated(String),
    #[error("interval validation failed: {0}")]
    IntervalValidation(String),
    #[error("arc geometry error: {0}")]
    ArcGeometry(String),
    #[error("model does not start with a vanishing diagonal entry")]
    NoDegenerateStart,
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
