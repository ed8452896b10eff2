use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown renormalization symbol `{0}`")]
    UnknownSymbol(String),

    #[error("matching residual at order {order} is not of the form LΦ: {detail}")]
    MatchingResidual { order: usize, detail: String },

    #[error("resource cap of {cap} candidates exceeded while {stage}")]
    ResourceCap { cap: usize, stage: String },

    #[error("d = {0} is not subcritical: the divergence bound grows with N")]
    NotSubcritical(u32),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("explicit scheme unstable: dt = {dt} exceeds dx^2/(2d) = {limit}")]
    Stability { dt: f64, limit: f64 },

    #[error("diagram cannot be evaluated numerically: {0}")]
    NotEvaluable(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("extension degree ρ = +∞ admits no extension")]
    InfiniteDegree,
}

pub type Result<T> = std::result::Result<T, Error>;
