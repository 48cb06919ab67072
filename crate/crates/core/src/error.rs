use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a negative fundamental discriminant")]
    NotFundamental(i64),

    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: i64, hi: i64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precision mismatch: {left} vs {right} digits")]
    PrecisionMismatch { left: u32, right: u32 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("reference unavailable at this size: D = {d} exceeds ceiling {ceiling}")]
    ReferenceUnavailable { d: u64, ceiling: u64 },

    #[error("quadrature did not converge: residual {residual}")]
    Quadrature { residual: String },

    #[error("incomplete zero list near [{lo}, {hi}]: {reason}")]
    IncompleteZeros { lo: String, hi: String, reason: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("Lowdef fails: 5*gamma1^2*g0 = {u} >= 1")]
    LowdefFails { u: String },

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("collision at t = {t_stop} (min gap {min_gap})")]
    Collision { t_stop: String, min_gap: String },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: String },

    #[error("no report with an admissible lambda")]
    NoAdmissibleReport,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
