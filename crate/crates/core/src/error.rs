use thiserror::Error;

/// Errors raised by constructors, verifiers and samplers in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("integral did not converge: {0}")]
    DivergentIntegral(String),
    #[error("moment order {requested} exceeds the supported maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },
    #[error("Hankel matrix is not positive definite at degree {degree}")]
    IndefiniteHankel { degree: usize },
    #[error("degree {degree} exceeds the support of a measure with {atoms} atoms")]
    DegreeExceedsSupport { degree: usize, atoms: usize },
    #[error("degree {degree} is out of range (stored up to {max})")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("symmetric eigensolver did not converge")]
    EigenNonConvergence,
    #[error("{what} = {value} lies outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },
    #[error("prior is not integrable: {0}")]
    NonIntegrable(String),
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("parameter {name} must be positive, got {value}")]
    NonpositiveParameter { name: &'static str, value: f64 },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{value} is not in the Jorgensen set of the {family} family")]
    JorgensenViolation { family: String, value: f64 },
    #[error("eta = {eta} must lie in [0, {q}]")]
    EtaOutOfRange { eta: f64, q: f64 },
    #[error("t = {t} is outside the admissible range [0, {max}]")]
    TOutOfRange { t: f64, max: f64 },
    #[error("margin mismatch: {0}")]
    MarginMismatch(String),
    #[error("supports do not match case {case}: {reason}")]
    WrongCase { case: char, reason: String },
    #[error("Monte Carlo standard error {std_err} exceeds the requested tolerance {tol}")]
    BudgetTooSmall { std_err: f64, tol: f64 },
    #[error("exact transition matrix needs a finitely supported margin")]
    InfiniteSupport,
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("trace of length {len} is too short for {max_lag} lags (need {needed})")]
    InsufficientLength {
        len: usize,
        max_lag: usize,
        needed: usize,
    },
    #[error("a = {0} is below 1/2")]
    ParameterBelowHalf(f64),
    #[error("points are within the boundary margin of the ellipse (delta = {0})")]
    DegenerateDelta(f64),
    #[error("resource budget exceeded: {0}")]
    ResourceBudget(String),
    #[error("mixing measure must be a probability on [0, 1]: {0}")]
    InvalidMixingSupport(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("kernel normalization point is invalid: {0}")]
    InvalidNormalizationPoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveParameter { name, value })
    }
}
