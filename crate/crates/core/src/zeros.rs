//! Low-lying zeros of `Ξ_t(x, χ)` on the real axis: sign-change scanning,
//! tangency inspection, bracket refinement, completeness certification by
//! the sum rule `−½ Ξ″(0)/Ξ(0) = Σ_{j≥1} γ_j⁻²`, and classification of the
//! critical point of `Z` at the origin.
//!
//! Scanning works with the normalized function `Ξ_t(x) / ((D/π)^{3/4}
//! |Γ(3/4 + ix/2)|)`, which is `Z` at heat time 0 and keeps magnitudes
//! comparable along the axis for small `|t|`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bigreal::{BigReal, Precision};
use crate::discriminant::FundamentalDiscriminant;
use crate::error::{Error, Result};
use crate::specfun::trigamma_quarter;
use crate::xi::{MomentPair, XiEvaluator, XiOptions};

const MAX_DEPTH: u32 = 14;
const MAX_EXTENSIONS: u32 = 6;

/// How many zeros to find.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroTarget {
    /// The first `n` positive zeros.
    Count(usize),
    /// Every zero in `(0, h]`.
    Height(f64),
    /// Zeros up to and including the first one above `bound`, and at least
    /// `min_count` of them.
    Exceeding { bound: f64, min_count: usize },
}

/// Ordered positive zeros with bracketing certificates.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroList {
    pub disc: FundamentalDiscriminant,
    pub gammas: Vec<BigReal>,
    pub brackets: Vec<(BigReal, BigReal)>,
    pub tol: BigReal,
    pub residual: Option<BigReal>,
    /// Height up to which the list is complete.
    pub height: f64,
}

impl ZeroList {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// The first `n` zeros.
    pub fn truncated(&self, n: usize) -> ZeroList {
        let n = n.min(self.len());
        let height = if n < self.len() {
            self.gammas[n - 1].to_f64()
        } else {
            self.height
        };
        ZeroList {
            disc: self.disc,
            gammas: self.gammas[..n].to_vec(),
            brackets: self.brackets[..n].to_vec(),
            tol: self.tol.clone(),
            residual: None,
            height,
        }
    }

    /// `Σ γ_j⁻²` over the list.
    pub fn inverse_square_sum(&self) -> BigReal {
        self.gammas
            .iter()
            .fold(BigReal::zero(self.tol.precision()), |acc, g| acc + g.square().recip())
    }

    /// Index (1-based) of the first zero exceeding `bound`.
    pub fn first_index_above(&self, bound: f64) -> Option<usize> {
        self.gammas.iter().position(|g| g.to_f64() > bound).map(|i| i + 1)
    }
}

/// Options for [`find_zeros`].
#[derive(Clone, Debug)]
pub struct ZeroOptions {
    pub precision: Precision,
    pub eps: BigReal,
    pub tol: BigReal,
    pub target: ZeroTarget,
}

impl ZeroOptions {
    pub fn new(precision: Precision, target: ZeroTarget) -> Self {
        ZeroOptions {
            precision,
            eps: BigReal::parse("5e-16", precision).expect("literal"),
            tol: BigReal::parse("1e-12", precision).expect("literal"),
            target,
        }
    }
}

/// Scan spacing `1 / (8 max(1, log(D/2π)))`.
pub fn scan_spacing(d: u64) -> f64 {
    let l = (d as f64 / (2.0 * std::f64::consts::PI)).ln();
    1.0 / (8.0 * l.max(1.0))
}

/// Approximate number of zeros in `(0, T]`: `(T/2π) log(D T / 2πe)`.
pub fn zero_count_estimate(d: u64, t: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let arg = d as f64 * t / (tau * std::f64::consts::E);
    if arg <= 1.0 {
        0.0
    } else {
        t / tau * arg.ln()
    }
}

fn height_for_count(d: u64, n: usize) -> f64 {
    let mut t = 1.0;
    while zero_count_estimate(d, t) < n as f64 {
        t *= 1.1;
    }
    t
}

/// Zeros of `Ξ(x, χ)` for the requested target.
pub fn find_zeros(disc: FundamentalDiscriminant, opts: &ZeroOptions) -> Result<ZeroList> {
    find_zeros_t(disc, opts, &BigReal::zero(opts.precision))
}

/// Zeros of `Ξ_t(x, χ)` at heat time `t`.
pub fn find_zeros_t(
    disc: FundamentalDiscriminant,
    opts: &ZeroOptions,
    t: &BigReal,
) -> Result<ZeroList> {
    check_tol(&opts.tol)?;
    let d = disc.d();
    let mut height = match opts.target {
        ZeroTarget::Count(n) => height_for_count(d, n) * 1.1 + 1.0,
        ZeroTarget::Height(h) => h,
        ZeroTarget::Exceeding { bound, min_count } => {
            (bound * 1.25 + 0.5).max(height_for_count(d, min_count) * 1.1 + 0.5)
        }
    };
    for _ in 0..=MAX_EXTENSIONS {
        let xo = XiOptions::new(opts.precision)
            .eps(opts.eps.clone())
            .t(t.clone())
            .height(height);
        let e = XiEvaluator::new(disc, &xo)?;
        let zl = find_zeros_in(&e, height, &opts.tol)?;
        let done = match opts.target {
            ZeroTarget::Count(n) => zl.len() >= n,
            ZeroTarget::Height(_) => true,
            ZeroTarget::Exceeding { bound, min_count } => {
                zl.first_index_above(bound).is_some() && zl.len() >= min_count
            }
        };
        if done {
            return Ok(match opts.target {
                ZeroTarget::Count(n) => zl.truncated(n),
                ZeroTarget::Exceeding { bound, min_count } => {
                    let k = zl.first_index_above(bound).expect("checked");
                    zl.truncated(k.max(min_count))
                }
                ZeroTarget::Height(_) => zl,
            });
        }
        height *= 1.4;
    }
    Err(Error::IncompleteZeros {
        lo: "0".into(),
        hi: format!("{height}"),
        reason: "target not reached after extending the scan height".into(),
    })
}

fn check_tol(tol: &BigReal) -> Result<()> {
    let p = tol.precision();
    let floor = BigReal::from_i64(10, p).powi(2 - p.digits() as i32);
    if *tol < floor || !tol.is_sign_positive() {
        return Err(Error::Config(format!(
            "tol = {tol} is below 10^(2-P) for P = {}",
            p.digits()
        )));
    }
    Ok(())
}

struct Sampler<'a> {
    e: &'a XiEvaluator,
}

impl Sampler<'_> {
    // Normalized value and its error bound.
    fn eval(&self, x: &BigReal) -> Result<(BigReal, BigReal)> {
        let f = self.e.z_factor_w(x);
        let v = self.e.xi_w(x)? / &f;
        let err = self.e.err_w() / &f;
        Ok((v, err))
    }

    fn sign(&self, x: &BigReal) -> Result<i8> {
        Ok(self.e.xi_w(x)?.signum())
    }
}

/// All zeros of the evaluator's `Ξ_t` in `(0, height]`, refined to `tol`.
pub fn find_zeros_in(e: &XiEvaluator, height: f64, tol: &BigReal) -> Result<ZeroList> {
    check_tol(tol)?;
    let w = e.working_precision();
    let s = Sampler { e };
    let h = scan_spacing(e.disc().d());
    let k_max = (height / h).ceil() as i64;
    let hb = BigReal::from_f64(h, w);
    let xs: Vec<BigReal> = (0..=k_max)
        .map(|k| (&hb * k).min(BigReal::from_f64(height, w)))
        .collect();
    let vals: Vec<(BigReal, BigReal)> = xs
        .par_iter()
        .map(|x| s.eval(x))
        .collect::<Result<_>>()?;

    let mut brackets: Vec<(BigReal, BigReal)> = Vec::new();
    for k in 0..xs.len() - 1 {
        let (a, b) = (&vals[k].0, &vals[k + 1].0);
        if a.signum() * b.signum() < 0 {
            brackets.push((xs[k].clone(), xs[k + 1].clone()));
        } else if a.is_zero() && k > 0 {
            return Err(incomplete(&xs[k], &xs[k], "exact zero on the scan grid"));
        }
    }

    // Local minima of |f| without a sign change.
    for k in 0..xs.len() - 1 {
        let (prev, cur, next) = if k == 0 {
            (&vals[1], &vals[0], &vals[1])
        } else {
            (&vals[k - 1], &vals[k], &vals[k + 1])
        };
        let same = prev.0.signum() == cur.0.signum() && cur.0.signum() == next.0.signum();
        if same && cur.0.abs() < prev.0.abs() && cur.0.abs() < next.0.abs() {
            let lo = if k == 0 { -&xs[1] } else { xs[k - 1].clone() };
            inspect(&s, &lo, &xs[k + 1], 0, &mut brackets)?;
        }
    }
    brackets.retain(|(a, _)| !a.is_sign_negative());
    brackets.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    brackets.dedup_by(|a, b| a.0 == b.0);

    let tol_w = tol.to_precision(w);
    let refined: Vec<(BigReal, BigReal)> = brackets
        .par_iter()
        .map(|(a, b)| refine(&s, a, b, &tol_w))
        .collect::<Result<_>>()?;

    let p = e.precision();
    let gammas = refined
        .iter()
        .map(|(a, b)| ((a + b) / 2i64).to_precision(p))
        .collect();
    Ok(ZeroList {
        disc: e.disc(),
        gammas,
        brackets: refined
            .into_iter()
            .map(|(a, b)| (a.to_precision(p), b.to_precision(p)))
            .collect(),
        tol: tol.clone(),
        residual: None,
        height,
    })
}

fn incomplete(lo: &BigReal, hi: &BigReal, reason: &str) -> Error {
    Error::IncompleteZeros {
        lo: lo.to_decimal_digits(12),
        hi: hi.to_decimal_digits(12),
        reason: reason.into(),
    }
}

// Resolves a suspected tangency in [lo, hi]: either it hides sign changes
// (bracketed and pushed) or the minimum is bounded away from zero.
fn inspect(
    s: &Sampler<'_>,
    lo: &BigReal,
    hi: &BigReal,
    depth: u32,
    out: &mut Vec<(BigReal, BigReal)>,
) -> Result<()> {
    let n = 8i64;
    let step = (hi - lo) / n;
    let xs: Vec<BigReal> = (0..=n).map(|k| lo + &(&step * k)).collect();
    let vals: Vec<(BigReal, BigReal)> = xs.iter().map(|x| s.eval(x)).collect::<Result<_>>()?;
    let mut found = false;
    for k in 0..n as usize {
        if vals[k].0.signum() * vals[k + 1].0.signum() < 0 {
            out.push((xs[k].clone(), xs[k + 1].clone()));
            found = true;
        }
    }
    if found {
        return Ok(());
    }
    let (kmin, _) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.abs().partial_cmp(&b.1 .0.abs()).expect("finite"))
        .expect("nonempty");
    let (zmin, err) = &vals[kmin];
    if zmin.abs() <= err * 4i64 {
        return Err(incomplete(lo, hi, "|Z| below the error budget without a sign change"));
    }
    if kmin == 0 || kmin == n as usize {
        // Monotone on the subgrid: the dip was a coarse-grid artefact.
        return Ok(());
    }
    // Vertex of the parabola through the minimum and its neighbours.
    let (y0, y1, y2) = (&vals[kmin - 1].0, zmin, &vals[kmin + 1].0);
    let curv = y0 - &(y1 * 2i64) + y2;
    let vertex = if curv.is_zero() {
        y1.clone()
    } else {
        let slope = (y2 - y0) / 2i64;
        y1 - &(slope.square() / (curv * 2i64))
    };
    if vertex.signum() == y1.signum() && vertex.abs() * 2i64 >= y1.abs() {
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(incomplete(lo, hi, "tangency not resolved at maximal depth"));
    }
    inspect(s, &xs[kmin - 1], &xs[kmin + 1], depth + 1, out)
}

// Illinois iteration with a guaranteed halving every two steps.
fn refine(
    s: &Sampler<'_>,
    a: &BigReal,
    b: &BigReal,
    tol: &BigReal,
) -> Result<(BigReal, BigReal)> {
    let (mut a, mut b) = (a.clone(), b.clone());
    let (mut fa, mut fb) = (s.eval(&a)?.0, s.eval(&b)?.0);
    if fa.signum() * fb.signum() >= 0 {
        return Err(incomplete(&a, &b, "bracket lost its sign change"));
    }
    let mut side = 0i8;
    let mut width_two_ago = (&b - &a) * 2i64;
    let mut iter = 0u32;
    while (&b - &a) > *tol {
        iter += 1;
        let width = &b - &a;
        let force_bisect = iter % 2 == 0 && width * 2i64 > width_two_ago;
        if iter % 2 == 0 {
            width_two_ago = &b - &a;
        }
        let mut c = if force_bisect {
            (&a + &b) / 2i64
        } else {
            &b - &(&fb * &(&b - &a) / (&fb - &fa))
        };
        if !(c > a && c < b) {
            c = (&a + &b) / 2i64;
        }
        let (fc, err) = s.eval(&c)?;
        if fc.abs() <= err {
            return noise_floor(s, &a, &b, &c, tol);
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
            if side == -1 {
                fb = fb / 2i64;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa = fa / 2i64;
            }
            side = 1;
        }
        if iter > 10_000 {
            return Err(incomplete(&a, &b, "refinement did not converge"));
        }
    }
    Ok((a, b))
}

// The value at `c` is inside the error budget: take the width-`tol`
// bracket centred on `c` if its ends carry a certified sign change.
fn noise_floor(
    s: &Sampler<'_>,
    a: &BigReal,
    b: &BigReal,
    c: &BigReal,
    tol: &BigReal,
) -> Result<(BigReal, BigReal)> {
    let half = tol / 2i64;
    let lo = (c - &half).max(a.clone());
    let hi = (c + &half).min(b.clone());
    let (flo, elo) = s.eval(&lo)?;
    let (fhi, ehi) = s.eval(&hi)?;
    if flo.abs() > elo && fhi.abs() > ehi && flo.signum() * fhi.signum() < 0 {
        return Ok((lo, hi));
    }
    Err(incomplete(a, b, "zero not resolvable above the noise floor at this tol"))
}

/// Sum-rule completeness check.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub residual: BigReal,
    /// Allowed negative excursion, `neg_factor · err(−½ xi2/xi0)`.
    pub lower: BigReal,
    /// Crude tail allowance, `tail_factor · count / γ_last²`.
    pub upper: BigReal,
    pub complete: bool,
}

/// `residual = −½ xi2/xi0 − Σ γ_j⁻²`, stored in the list.
pub fn certify(zl: &mut ZeroList, mp: &MomentPair) -> Certificate {
    certify_with(zl, mp, 2, 2)
}

pub fn certify_with(
    zl: &mut ZeroList,
    mp: &MomentPair,
    neg_factor: i64,
    tail_factor: i64,
) -> Certificate {
    let p = zl.tol.precision();
    let s = mp.zero_square_sum().to_precision(p);
    let residual = s - zl.inverse_square_sum();
    let lower = -(mp.ratio_err().to_precision(p) / 2i64 * neg_factor);
    let upper = match zl.gammas.last() {
        Some(g) => BigReal::from_u64(zl.len() as u64, p) * tail_factor / g.square(),
        None => BigReal::zero(p),
    };
    let complete = residual >= lower && residual <= upper;
    if !complete {
        log::warn!(
            "{}: sum-rule residual {} outside [{}, {}]",
            zl.disc,
            residual.to_decimal_digits(8),
            lower.to_decimal_digits(4),
            upper.to_decimal_digits(4)
        );
    }
    zl.residual = Some(residual.clone());
    Certificate {
        residual,
        lower,
        upper,
        complete,
    }
}

/// Nature of the critical point of `Z(·, χ)` at the origin.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OriginClass {
    PositiveLocalMax,
    PositiveLocalMin,
    NegativeLocalMax,
    NegativeLocalMin,
    Zero,
}

impl std::fmt::Display for OriginClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OriginClass::PositiveLocalMax => "positive-local-max",
            OriginClass::PositiveLocalMin => "positive-local-min",
            OriginClass::NegativeLocalMax => "negative-local-max",
            OriginClass::NegativeLocalMin => "negative-local-min",
            OriginClass::Zero => "zero",
        };
        f.write_str(s)
    }
}

/// Classification from the moments: `sign Z(0) = sign Ξ(0)` and
/// `sign Z″(0) = sign(Ξ″(0) + ¼ψ′(3/4) Ξ(0))`.
pub fn classify_moments(mp: &MomentPair) -> OriginClass {
    let p = mp.xi0.precision();
    let c = trigamma_quarter(p).c;
    if mp.xi0.abs() <= mp.err {
        return OriginClass::Zero;
    }
    let curv = &mp.xi2 + &(&c * &mp.xi0);
    if curv.abs() <= &mp.err * &(BigReal::one(p) + &c) {
        return OriginClass::Zero;
    }
    match (mp.xi0.is_sign_positive(), curv.is_sign_negative()) {
        (true, true) => OriginClass::PositiveLocalMax,
        (true, false) => OriginClass::PositiveLocalMin,
        (false, true) => OriginClass::NegativeLocalMax,
        (false, false) => OriginClass::NegativeLocalMin,
    }
}

/// `Ξ(0) > 0 ∧ Σ_{j≥1} γ_j⁻² < ¼ψ′(3/4)`: the local-minimum test with the
/// zero sum counted over positive ordinates only, where the symmetric sum
/// `2Σ_{j≥1} γ_j⁻²` gives the true curvature. Used to reproduce published
/// counts that follow that convention.
pub fn positive_sum_below_trigamma(mp: &MomentPair) -> bool {
    let c = trigamma_quarter(mp.xi0.precision()).c;
    mp.xi0.is_sign_positive() && mp.zero_square_sum() < c
}

/// Classifies the origin for one discriminant.
pub fn classify_origin(
    disc: FundamentalDiscriminant,
    precision: Precision,
    eps: &BigReal,
) -> Result<OriginClass> {
    let opts = XiOptions::new(precision).eps(eps.clone()).height(0.0);
    let e = XiEvaluator::new(disc, &opts)?;
    Ok(classify_moments(&e.moments_w()?))
}

/// Parses an external zero list: one decimal ordinate per line; blank lines
/// and lines starting with `#` are ignored. Returns the ordinates sorted.
pub fn parse_zero_list(text: &str, precision: Precision) -> Result<Vec<BigReal>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let v = BigReal::parse(l, precision)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if !v.is_sign_positive() {
            return Err(Error::Parse(format!(
                "line {}: ordinate {l} is not positive",
                lineno + 1
            )));
        }
        out.push(v);
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    if out.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Parse("duplicate ordinate".into()));
    }
    Ok(out)
}

/// Builds a [`ZeroList`] from imported ordinates, checking a sign change of
/// `Ξ` across `γ ± tol/2` for each.
pub fn import_zero_list(
    e: &XiEvaluator,
    gammas: Vec<BigReal>,
    tol: &BigReal,
) -> Result<ZeroList> {
    let w = e.working_precision();
    let s = Sampler { e };
    let half = tol.to_precision(w) / 2i64;
    let mut brackets = Vec::with_capacity(gammas.len());
    for g in &gammas {
        let gw = g.to_precision(w);
        let (a, b) = (&gw - &half, &gw + &half);
        if s.sign(&a)? * s.sign(&b)? >= 0 {
            return Err(incomplete(&a, &b, "imported ordinate has no sign change"));
        }
        brackets.push((a.to_precision(tol.precision()), b.to_precision(tol.precision())));
    }
    let height = gammas.last().map(|g| g.to_f64()).unwrap_or(0.0);
    Ok(ZeroList {
        disc: e.disc(),
        gammas,
        brackets,
        tol: tol.clone(),
        residual: None,
        height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p30() -> Precision {
        Precision::new(30).unwrap()
    }

    fn disc(n: i64) -> FundamentalDiscriminant {
        FundamentalDiscriminant::new(n).unwrap()
    }

    #[test]
    fn first_zero_of_163() {
        let zl = find_zeros(disc(-163), &ZeroOptions::new(p30(), ZeroTarget::Count(3))).unwrap();
        assert_eq!(zl.len(), 3);
        let g1 = zl.gammas[0].to_f64();
        assert!((g1 - 0.202901).abs() < 5e-7, "{g1}");
        for ((a, b), g) in zl.brackets.iter().zip(&zl.gammas) {
            assert!(a <= g && g <= b);
            assert!(&(b - a) <= &zl.tol);
        }
        assert!(zl.gammas.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn removing_a_zero_shifts_residual_by_its_inverse_square() {
        let q = p30();
        let mut zl = find_zeros(disc(-163), &ZeroOptions::new(q, ZeroTarget::Count(5))).unwrap();
        let e = XiEvaluator::new(disc(-163), &XiOptions::new(q)).unwrap();
        let mp = e.moments().unwrap();
        let full = certify(&mut zl, &mp).residual;
        let g1 = zl.gammas[0].clone();
        let mut rest = zl.clone();
        rest.gammas.remove(0);
        rest.brackets.remove(0);
        let r = certify(&mut rest, &mp).residual;
        let jump = (&r - &full - g1.square().recip()).abs().to_f64();
        assert!(jump < 1e-25, "{jump:e}");
    }

    #[test]
    fn classification_examples() {
        let eps = BigReal::parse("5e-16", p30()).unwrap();
        assert_eq!(
            classify_origin(disc(-115147), p30(), &eps).unwrap(),
            OriginClass::PositiveLocalMax
        );
        assert_eq!(
            classify_origin(disc(-3), p30(), &eps).unwrap(),
            OriginClass::PositiveLocalMin
        );
    }

    #[test]
    fn parse_external_list() {
        let text = "# zeros\n0.5\n\n0.25\n1e0\n";
        let v = parse_zero_list(text, p30()).unwrap();
        assert_eq!(v.len(), 3);
        assert!(v[0] < v[1] && v[1] < v[2]);
        assert!(parse_zero_list("0.1\n-0.2\n", p30()).is_err());
        assert!(parse_zero_list("abc\n", p30()).is_err());
        assert!(parse_zero_list("0.1\n0.1\n", p30()).is_err());
    }

    #[test]
    fn tol_floor_is_enforced() {
        let mut o = ZeroOptions::new(p30(), ZeroTarget::Count(1));
        o.tol = BigReal::parse("1e-29", p30()).unwrap();
        assert!(find_zeros(disc(-163), &o).is_err());
    }

    #[test]
    fn count_estimate_grows() {
        assert!(zero_count_estimate(163, 92.0) > 95.0);
        assert!(zero_count_estimate(163, 92.0) < 105.0);
        assert_eq!(zero_count_estimate(163, 0.01), 0.0);
    }
}
