//! Lower bounds on `Λ_{−D}` from the first zero and a bound on
//! `g(0) = 2 Σ_{j≥2} [1/(γ_j+γ₁)² + 1/(γ_j−γ₁)²]`.
//!
//! Pipeline: moments of `Φ` → zeros up to the first one above 1 → sum-rule
//! certificate → `g(0)` bound → `λ` when `5γ₁² g(0) < 1` → the normalized
//! Low criterion.

use serde::Serialize;

use crate::bigreal::{BigReal, Precision};
use crate::discriminant::FundamentalDiscriminant;
use crate::error::{Error, Result};
use crate::specfun::trigamma_quarter;
use crate::xi::{MomentPair, XiEvaluator, XiOptions};
use crate::zeros::{certify, find_zeros, import_zero_list, ZeroList, ZeroOptions, ZeroTarget};

/// `(1 + y²)/(1 − y²)²`.
fn pair_factor(y: &BigReal) -> BigReal {
    let y2 = y.square();
    let one = BigReal::one(y.precision());
    (&one + &y2) / (&one - &y2).square()
}

fn check_first_zero(zl: &ZeroList) -> Result<&BigReal> {
    let g1 = zl
        .gammas
        .first()
        .ok_or_else(|| Error::Precondition("empty zero list".into()))?;
    if *g1 >= BigReal::one(g1.precision()) {
        return Err(Error::Precondition(format!("gamma_1 = {g1} is not below 1")));
    }
    Ok(g1)
}

/// `2 Σ_{2≤j≤n} [1/(γ_j+γ₁)² + 1/(γ_j−γ₁)²]`, the direct partial sum of
/// `g(0)` over the first `n` zeros.
pub fn g0_partial(zl: &ZeroList, n: usize) -> BigReal {
    let p = zl.tol.precision();
    let Some(g1) = zl.gammas.first() else {
        return BigReal::zero(p);
    };
    let s = zl.gammas[1..n.min(zl.len())]
        .iter()
        .fold(BigReal::zero(p), |acc, g| {
            acc + (g + g1).square().recip() + (g - g1).square().recip()
        });
    s * 2i64
}

/// Bound on `g(0)` with `N` the first index such that `γ_N > 1`.
pub fn g0_bound(zl: &ZeroList, mp: &MomentPair) -> Result<BigReal> {
    let n = zl
        .first_index_above(1.0)
        .ok_or_else(|| Error::Precondition("no zero above 1 in the list".into()))?;
    g0_bound_n(zl, mp, n)
}

/// Bound on `g(0)` using zeros `1..N` explicitly:
/// `2 Σ_{2≤j<N} [1/(γ_j+γ₁)² + 1/(γ_j−γ₁)²]
///  − (1+γ₁²)/(1−γ₁²)² · (2 Ξ″(0)/Ξ(0) + 4 Σ_{1≤j<N} γ_j⁻²)`.
/// Valid for any `N ≤ len` with `γ_N ≥ 1`. The moment error is added so the
/// value stays an upper bound.
pub fn g0_bound_n(zl: &ZeroList, mp: &MomentPair, n: usize) -> Result<BigReal> {
    let g1 = check_first_zero(zl)?;
    if n < 2 || n > zl.len() {
        return Err(Error::Precondition(format!(
            "N = {n} outside 2..={}",
            zl.len()
        )));
    }
    if zl.gammas[n - 1] < BigReal::one(g1.precision()) {
        return Err(Error::Precondition(format!(
            "gamma_{n} = {} is below 1",
            zl.gammas[n - 1]
        )));
    }
    let p = g1.precision();
    let explicit = g0_partial(zl, n - 1);
    let head = zl.gammas[..n - 1]
        .iter()
        .fold(BigReal::zero(p), |acc, g| acc + g.square().recip());
    let ratio = (&mp.xi2 / &mp.xi0).to_precision(p);
    let k = pair_factor(g1);
    let tail = -(&k * &(ratio * 2i64 + head * 4i64));
    let slack = &k * &mp.ratio_err().to_precision(p) * 2i64 + zero_slack(zl, n, &k);
    Ok(explicit + tail + slack)
}

// Twice the first-order change of the bound when each of γ_1..γ_{N−1}
// moves by `tol`.
fn zero_slack(zl: &ZeroList, n: usize, k: &BigReal) -> BigReal {
    let p = zl.tol.precision();
    let g1 = &zl.gammas[0];
    let cube = |x: BigReal| x.abs().powi(3).recip();
    let pairs = zl.gammas[1..n - 1].iter().fold(BigReal::zero(p), |acc, g| {
        acc + cube(g + g1) + cube(g - g1)
    });
    let heads = zl.gammas[..n - 1]
        .iter()
        .fold(BigReal::zero(p), |acc, g| acc + cube(g.clone()));
    (pairs * 8i64 + k * &heads * 8i64) * &zl.tol * 2i64
}

/// `λ = ((1 − 5γ₁² g0)^{4/5} − 1) / (8 g0)`.
pub fn lambda(gamma1: &BigReal, g0: &BigReal) -> Result<BigReal> {
    let p = gamma1.precision();
    if !g0.is_sign_positive() {
        return Err(Error::Precondition(format!("g(0) = {g0} is not positive")));
    }
    let u = gamma1.square() * g0 * 5i64;
    let one = BigReal::one(p);
    if u >= one {
        return Err(Error::LowdefFails {
            u: u.to_decimal_digits(8),
        });
    }
    let e = BigReal::ratio(4, 5, p);
    Ok(((one - u).powf(&e) - BigReal::one(p)) / (g0 * 8i64))
}

/// `λ_c = ((1 − ((c+2)/2) γ₁² f0)^{c/(c+2)} − 1) / (c f0)`, the bound obtained
/// from `f′ > −c f²`. Agrees with [`lambda`] bit for bit at `c = 8`.
pub fn lambda_c(gamma1: &BigReal, f0: &BigReal, c: &BigReal) -> Result<BigReal> {
    let p = gamma1.precision();
    if !c.is_sign_positive() {
        return Err(Error::Precondition(format!("c = {c} is not positive")));
    }
    if !f0.is_sign_positive() {
        return Err(Error::Precondition(format!("f(0) = {f0} is not positive")));
    }
    let c2 = c + 2i64;
    let coef = &c2 / 2i64;
    let u = gamma1.square() * f0 * coef;
    let one = BigReal::one(p);
    if u >= one {
        return Err(Error::Precondition(format!(
            "((c+2)/2) gamma_1^2 f(0) = {} is not below 1",
            u.to_decimal_digits(8)
        )));
    }
    let e = c / &c2;
    Ok(((one - u).powf(&e) - BigReal::one(p)) / (c * f0))
}

/// `log(D/2π)`.
pub fn log_scale(d: u64, p: Precision) -> BigReal {
    (BigReal::from_u64(d, p) / (BigReal::pi(p) * 2i64)).ln()
}

/// `4 (1+γ̃₁²)/(1−γ̃₁²)² · Σ_{j≥2} γ_j⁻²`, a bound on `g(0)` when
/// `γ̃_j ≥ 1` for all `j ≥ 2`.
pub fn rmt_g0_bound(zero_square_sum: &BigReal, gamma1_tilde: &BigReal) -> Result<BigReal> {
    if *gamma1_tilde >= BigReal::one(gamma1_tilde.precision()) {
        return Err(Error::Precondition(format!(
            "normalized gamma_1 = {gamma1_tilde} is not below 1"
        )));
    }
    Ok(pair_factor(gamma1_tilde) * zero_square_sum * 4i64)
}

/// Both sides of the Low criterion and its verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Low3 {
    pub lhs: BigReal,
    pub rhs: BigReal,
    pub is_low: bool,
}

/// `lhs = −½ Ξ″(0)/Ξ(0) + ⅛ ψ′(3/4)`,
/// `rhs = (21/20) γ₁⁻² − (1/5) log(D/2π)²`,
/// `is_low = γ₂ log(D/2π) ≥ 1 ∧ lhs < rhs`.
pub fn low3_classify(mp: &MomentPair, gamma1: &BigReal, gamma2: &BigReal, d: u64) -> Low3 {
    let p = gamma1.precision();
    let c = trigamma_quarter(p).c;
    let lhs = mp.zero_square_sum().to_precision(p) + c / 2i64;
    let l = log_scale(d, p);
    let rhs = gamma1.square().recip() * 21i64 / 20 - l.square() / 5;
    let is_low = gamma2 * &l >= BigReal::one(p) && lhs < rhs;
    Low3 { lhs, rhs, is_low }
}

/// Settings for [`analyze`].
#[derive(Clone, Debug)]
pub struct AnalysisConfig {
    pub precision: Precision,
    pub eps: BigReal,
    pub tol: BigReal,
    /// Index `N` of the zero where the explicit pair sum stops. `None` takes
    /// the first zero above 1; larger values tighten the bound.
    pub zero_count: Option<usize>,
}

impl AnalysisConfig {
    pub fn new(precision: Precision) -> Self {
        AnalysisConfig {
            precision,
            eps: BigReal::parse("5e-16", precision).expect("literal"),
            tol: BigReal::parse("1e-12", precision).expect("literal"),
            zero_count: None,
        }
    }
}

/// Failure of one pipeline stage.
#[derive(Clone, Debug, Serialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

/// Outcome of [`analyze`]. Fields after a failed stage stay empty.
#[derive(Clone, Debug, Serialize)]
pub struct LowReport {
    pub disc: FundamentalDiscriminant,
    pub gamma1: Option<BigReal>,
    pub gamma1_tilde: Option<BigReal>,
    pub gamma2_tilde: Option<BigReal>,
    pub g0_bound: Option<BigReal>,
    /// `5 γ₁² g0_bound`.
    pub lowdef_u: Option<BigReal>,
    pub lambda: Option<BigReal>,
    pub satisfies_lowdef: bool,
    pub low3_lhs: Option<BigReal>,
    pub low3_rhs: Option<BigReal>,
    pub is_low: bool,
    pub zeros_used: usize,
    pub precision: u32,
    pub error: Option<StageError>,
}

impl LowReport {
    fn empty(disc: FundamentalDiscriminant, precision: Precision) -> Self {
        LowReport {
            disc,
            gamma1: None,
            gamma1_tilde: None,
            gamma2_tilde: None,
            g0_bound: None,
            lowdef_u: None,
            lambda: None,
            satisfies_lowdef: false,
            low3_lhs: None,
            low3_rhs: None,
            is_low: false,
            zeros_used: 0,
            precision: precision.digits(),
            error: None,
        }
    }

    fn fail(mut self, stage: &str, e: Error) -> Self {
        self.error = Some(StageError {
            stage: stage.into(),
            message: e.to_string(),
        });
        self
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Full pipeline for one discriminant. Stage failures are recorded in the
/// report; a report without `error` has every field filled except possibly
/// `lambda`.
pub fn analyze(disc: FundamentalDiscriminant, config: &AnalysisConfig) -> LowReport {
    analyze_from(disc, config, None)
}

/// [`analyze`] with zeros taken from an external list instead of the scan.
/// Each ordinate must bracket a sign change of `Ξ` within `config.tol`, and
/// the list must reach past 1 (or `zero_count`) and pass the sum rule.
pub fn analyze_with_zeros(
    disc: FundamentalDiscriminant,
    config: &AnalysisConfig,
    gammas: Vec<BigReal>,
) -> LowReport {
    analyze_from(disc, config, Some(gammas))
}

fn imported(
    disc: FundamentalDiscriminant,
    config: &AnalysisConfig,
    gammas: Vec<BigReal>,
) -> Result<ZeroList> {
    let top = gammas.last().map(|g| g.to_f64()).unwrap_or(0.0);
    let need = config.zero_count.unwrap_or(2).max(2);
    if gammas.len() < need || (config.zero_count.is_none() && top <= 1.0) {
        return Err(Error::Precondition(format!(
            "imported list has {} zeros up to {top}; need {need} and one above 1",
            gammas.len()
        )));
    }
    let p = config.precision;
    let gammas: Vec<BigReal> = gammas.iter().map(|g| g.to_precision(p)).collect();
    let xo = XiOptions::new(p).eps(config.eps.clone()).height(top);
    let e = XiEvaluator::new(disc, &xo)?;
    import_zero_list(&e, gammas, &config.tol)
}

fn analyze_from(
    disc: FundamentalDiscriminant,
    config: &AnalysisConfig,
    source: Option<Vec<BigReal>>,
) -> LowReport {
    let p = config.precision;
    let mut rep = LowReport::empty(disc, p);

    let xo = XiOptions::new(p).eps(config.eps.clone()).height(0.0);
    let mp = match XiEvaluator::new(disc, &xo).and_then(|e| e.moments()) {
        Ok(m) => m,
        Err(e) => return rep.fail("moments", e),
    };

    let zo = ZeroOptions {
        precision: p,
        eps: config.eps.clone(),
        tol: config.tol.clone(),
        target: ZeroTarget::Exceeding {
            bound: 1.0,
            min_count: config.zero_count.unwrap_or(2).max(2),
        },
    };
    let found = match source {
        Some(g) => imported(disc, config, g),
        None => find_zeros(disc, &zo),
    };
    let mut zl = match found {
        Ok(z) => z,
        Err(e) => return rep.fail("zeros", e),
    };
    let cert = certify(&mut zl, &mp);
    if !cert.complete {
        let e = Error::IncompleteZeros {
            lo: "0".into(),
            hi: format!("{}", zl.height),
            reason: format!(
                "sum-rule residual {} outside [{}, {}]",
                cert.residual.to_decimal_digits(6),
                cert.lower.to_decimal_digits(3),
                cert.upper.to_decimal_digits(3)
            ),
        };
        return rep.fail("certify", e);
    }

    let g1 = zl.gammas[0].clone();
    let g2 = zl.gammas[1].clone();
    let l = log_scale(disc.d(), p);
    rep.gamma1 = Some(g1.clone());
    rep.gamma1_tilde = Some(&g1 * &l);
    rep.gamma2_tilde = Some(&g2 * &l);

    let n = config
        .zero_count
        .unwrap_or_else(|| zl.first_index_above(1.0).expect("target reached"));
    let g0 = match g0_bound_n(&zl, &mp, n) {
        Ok(g) => g,
        Err(e) => return rep.fail("g0_bound", e),
    };
    rep.zeros_used = n;
    let u = g1.square() * &g0 * 5i64;
    rep.g0_bound = Some(g0.clone());
    rep.satisfies_lowdef = u < BigReal::one(p);
    rep.lowdef_u = Some(u);
    if rep.satisfies_lowdef {
        match lambda(&g1, &g0) {
            Ok(v) => rep.lambda = Some(v),
            Err(e) => return rep.fail("lambda", e),
        }
    }

    let low = low3_classify(&mp, &g1, &g2, disc.d());
    rep.low3_lhs = Some(low.lhs);
    rep.low3_rhs = Some(low.rhs);
    rep.is_low = low.is_low;
    rep
}

/// The largest `λ` among the reports: the strongest lower bound on `Λ_Kr`.
pub fn best_bound<'a>(reports: impl IntoIterator<Item = &'a LowReport>) -> Result<BigReal> {
    reports
        .into_iter()
        .filter_map(|r| r.lambda.as_ref())
        .fold(None, |best: Option<&BigReal>, v| match best {
            Some(b) if *b >= *v => Some(b),
            _ => Some(v),
        })
        .cloned()
        .ok_or(Error::NoAdmissibleReport)
}
