use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("length mismatch: expected {expected} values, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("Sobolev order must be nonnegative, got {0}")]
    NegativeOrder(f64),
    #[error("{0}: input is not x-mean-free (the x-antiderivative is undefined)")]
    NotMeanFree(&'static str),
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),
    #[error("nonlinearity {0} has no growth metadata")]
    MissingGrowth(String),
    #[error("empty sample range [{0}, {1}]")]
    EmptyRange(f64, f64),
    #[error("invalid stepper configuration: {0}")]
    InvalidStepper(String),
    #[error("trajectory too sparse at t = {t}: snapshot spacing {spacing} exceeds the characteristic limit {required}")]
    SparseTrajectory { t: f64, spacing: f64, required: f64 },
    #[error("trajectory needs at least {needed} snapshots, has {found}")]
    ShortTrajectory { needed: usize, found: usize },
    #[error("invalid interval: need c < d, got c = {c}, d = {d}")]
    InvalidInterval { c: f64, d: f64 },
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid preset parameters: {0}")]
    InvalidPreset(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("degenerate field: {0} vanishes")]
    Degenerate(&'static str),
    #[error("t = {t} is at or beyond the blow-up time {t_star}")]
    PastBlowup { t: f64, t_star: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
