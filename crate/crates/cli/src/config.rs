use lowdisc::{BigReal, Error, FundamentalDiscriminant, Precision};

use crate::Common;

/// Why a command did not produce its artifact.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1: bad flags, non-fundamental input, unreadable files.
    Usage(String),
    /// Exit 2: the computation itself failed.
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotFundamental(_)
            | Error::InvalidRange { .. }
            | Error::Config(_)
            | Error::Parse(_)
            | Error::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// What a successful command prints.
pub struct Output {
    pub stdout: String,
    /// The artifact was produced but records a numerical failure.
    pub numerical_failure: bool,
}

/// Validated numeric settings shared by every command.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub precision: Precision,
    pub eps: BigReal,
}

impl RunConfig {
    /// `precision ≥ 17` and `eps ≥ 10^(3-precision)`.
    pub fn from_common(c: &Common) -> Result<Self, Failure> {
        let precision = Precision::new(c.precision)?;
        let eps = decimal("eps", &c.eps, precision)?;
        let floor = BigReal::from_i64(10, precision).powi(3 - precision.digits() as i32);
        if !eps.is_sign_positive() || eps < floor {
            return Err(Failure::Usage(format!(
                "--eps {} is below 10^(3-P) = 1e{} for --precision {}",
                c.eps,
                3 - precision.digits() as i32,
                precision.digits()
            )));
        }
        Ok(RunConfig { precision, eps })
    }
}

/// Parses a decimal flag value exactly at precision `p`.
pub fn decimal(flag: &str, text: &str, p: Precision) -> Result<BigReal, Failure> {
    let v = BigReal::parse(text, p)
        .map_err(|_| Failure::Usage(format!("--{flag}: `{text}` is not a decimal number")))?;
    if !v.is_finite() {
        return Err(Failure::Usage(format!("--{flag}: `{text}` is not finite")));
    }
    Ok(v)
}

/// Positive decimal flag value.
pub fn positive(flag: &str, text: &str, p: Precision) -> Result<BigReal, Failure> {
    let v = decimal(flag, text, p)?;
    if !v.is_sign_positive() || v.is_zero() {
        return Err(Failure::Usage(format!("--{flag} must be positive, got {text}")));
    }
    Ok(v)
}

pub fn discriminant(n: i64) -> Result<FundamentalDiscriminant, Failure> {
    Ok(FundamentalDiscriminant::new(n)?)
}
