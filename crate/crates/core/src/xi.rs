//! The completed function `Ξ_t(x, χ) = ∫₀^∞ e^{t u²} Φ(u, χ) cos(u x) du`,
//! the Hardy-type `Z(x, χ) = Ξ(x, χ) / ((D/π)^{3/4} |Γ(3/4 + ix/2)|)`, and
//! the moments `Ξ(0)`, `Ξ″(0)`.
//!
//! Computing `Ξ` at height `x` by a cosine transform cancels about
//! `πx/(4 ln 10)` digits, the decay of `|Γ(3/4 + ix/2)|`. An evaluator is
//! built for a maximal height `H`; it works internally at a precision that
//! absorbs that loss and scales its absolute target by the same factor, so
//! `Z` is accurate to roughly `eps` uniformly on `[−H, H]`.
//!
//! The integrand is sampled once on a composite Gauss–Legendre grid; every
//! later evaluation is a cosine sum over the cached weights `w_i e^{t u_i²} Φ(u_i)`.
//! The grid is accepted when doubling the panel count changes the test
//! functionals (`Ξ` at five heights in `[0, H]` and the `u²` moment) by less
//! than the error budget.

use rayon::prelude::*;
use serde::Serialize;

use crate::bigreal::{BigReal, Precision};
use crate::discriminant::FundamentalDiscriminant;
use crate::error::{Error, Result};
use crate::quadrature::{composite, gauss_legendre};
use crate::specfun::{ln_abs_gamma_on_line, trigamma_quarter};
use crate::theta::{ln_phi_bound, PhiEvaluator};

const GUARD: u32 = 10;
const MAX_REFINEMENTS: u32 = 4;
// Half-width of each Gauss–Legendre panel.
const PANEL_HALF: f64 = 0.25;
// Imaginary semi-axis of the analyticity ellipse used to size the rule.
const STRIP: f64 = std::f64::consts::PI / 8.0;

/// Configuration of an [`XiEvaluator`].
#[derive(Clone, Debug)]
pub struct XiOptions {
    pub precision: Precision,
    /// Absolute accuracy target for `Ξ` near `x = 0`.
    pub eps: BigReal,
    /// Heat time of the deformation, `|t| ≤ 1/2`.
    pub t: BigReal,
    /// Largest `|x|` the evaluator must support.
    pub height: f64,
}

impl XiOptions {
    pub fn new(precision: Precision) -> Self {
        XiOptions {
            precision,
            eps: BigReal::parse("5e-16", precision).expect("literal"),
            t: BigReal::zero(precision),
            height: 1.0,
        }
    }

    pub fn eps(mut self, eps: BigReal) -> Self {
        self.eps = eps.to_precision(self.precision);
        self
    }

    pub fn eps_str(self, eps: &str) -> Result<Self> {
        let e = BigReal::parse(eps, self.precision)?;
        Ok(self.eps(e))
    }

    pub fn t(mut self, t: BigReal) -> Self {
        self.t = t.to_precision(self.precision);
        self
    }

    pub fn height(mut self, h: f64) -> Self {
        self.height = h.abs();
        self
    }
}

/// `Ξ(0)` and `Ξ″(0)` with a common absolute error bound.
#[derive(Clone, Debug, Serialize)]
pub struct MomentPair {
    pub xi0: BigReal,
    pub xi2: BigReal,
    pub err: BigReal,
}

impl MomentPair {
    /// `−½ Ξ″(0)/Ξ(0)`, which equals `Σ_{j≥1} γ_j⁻²`.
    pub fn zero_square_sum(&self) -> BigReal {
        -(&self.xi2 / &self.xi0) / 2i64
    }

    /// A bound on the absolute error of `xi2/xi0`.
    pub fn ratio_err(&self) -> BigReal {
        let r = (&self.xi2 / &self.xi0).abs();
        (&self.err / &self.xi0.abs()) * (BigReal::one(self.err.precision()) + r)
    }
}

/// Quadrature description of a built evaluator.
#[derive(Clone, Debug, Serialize)]
pub struct QuadratureInfo {
    pub panels: usize,
    pub order: usize,
    pub u_end: f64,
    pub working_digits: u32,
}

#[derive(Clone, Debug)]
pub struct XiEvaluator {
    disc: FundamentalDiscriminant,
    prec: Precision,
    wprec: Precision,
    t: BigReal,
    height: f64,
    // (u_i, w_i e^{t u_i²} Φ(u_i)) at the working precision.
    nodes: Vec<(BigReal, BigReal)>,
    err_w: BigReal,
    eps_w: BigReal,
    scale_w: BigReal,
    info: QuadratureInfo,
}

fn log10_gamma_loss(height: f64) -> f64 {
    let p = Precision::raw(20);
    let at0 = ln_abs_gamma_on_line(&BigReal::zero(p));
    let at_h = ln_abs_gamma_on_line(&BigReal::from_f64(height, p));
    ((at0 - at_h).to_f64() / std::f64::consts::LN_10).max(0.0)
}

// Smallest grid point past which the pointwise bound certifies that the
// rest of [u, u_cut] contributes less than exp(ln_budget).
fn effective_end(d: u64, t: f64, u_cut: f64, ln_budget: f64) -> f64 {
    let step = 1.0 / 64.0;
    let mut u = 0.0;
    while u < u_cut {
        let a = std::f64::consts::PI * (2.0 * u).exp() / d as f64;
        // The bound is decreasing once a > 3/4 + t u.
        if a > 0.75 + t.max(0.0) * u + 0.5 {
            let b = ln_phi_bound(d, u, t) + (u_cut - u).max(1e-300).ln();
            if b < ln_budget {
                return u;
            }
        }
        u += step;
    }
    u_cut
}

impl XiEvaluator {
    pub fn new(disc: FundamentalDiscriminant, opts: &XiOptions) -> Result<Self> {
        let p = opts.precision;
        let half = BigReal::ratio(1, 2, p);
        if opts.t.abs() > half {
            return Err(Error::Config(format!(
                "heat time {} outside [-1/2, 1/2]",
                opts.t
            )));
        }
        if !opts.height.is_finite() {
            return Err(Error::Config("height must be finite".into()));
        }
        let floor = BigReal::from_i64(10, p).powi(3 - p.digits() as i32);
        let one = BigReal::one(p);
        if opts.eps < floor || opts.eps >= one {
            return Err(Error::Config(format!(
                "eps = {} must lie in [10^(3-P), 1) for P = {}",
                opts.eps,
                p.digits()
            )));
        }

        let d = disc.d();
        let df = d as f64;
        let h = opts.height;
        let tf = opts.t.to_f64();
        let tpos = tf.max(0.0);
        let ln10 = std::f64::consts::LN_10;

        let loss = log10_gamma_loss(h).ceil() as i32;
        let ln_eps_w = opts.eps.ln().to_f64() - loss as f64 * ln10;
        let u_cut_est = (df * (df * df).ln().max(1.0) - ln_eps_w).ln().max(1.0);
        let u_cut_est = (df * (2.0 * df.ln() - ln_eps_w)).ln().max(u_cut_est);
        let u_eff_est = effective_end(d, tf, u_cut_est, ln_eps_w - 8f64.ln());
        let ln_eps_phi = ln_eps_w - 4f64.ln() - tpos * u_eff_est * u_eff_est;
        let need = -ln_eps_phi / ln10;
        let mag = (0.75 * df.log10() + u_cut_est.log10()).max(0.0);
        let wdigits = (p.digits() as f64).max(need + 3.0) + mag + GUARD as f64;
        let wprec = Precision::raw(wdigits.ceil() as u32);

        let ten = BigReal::from_i64(10, wprec);
        let eps_w = opts.eps.to_precision(wprec) * ten.powi(-loss);
        let eps_phi = &eps_w / 4i64 * (BigReal::from_f64(-tpos * u_eff_est * u_eff_est, wprec)).exp();
        let phi = PhiEvaluator::new(disc.character(), &eps_phi)?;
        let u_cut = phi.params().u_cut.to_f64();
        let u_end = effective_end(d, tf, u_cut, ln_eps_w - 8f64.ln()).min(u_cut);
        let skipped = if u_end < u_cut {
            (ln_phi_bound(d, u_end, tf) + (u_cut - u_end).ln()).exp()
        } else {
            0.0
        };

        let rho = STRIP / PANEL_HALF + (1.0 + (STRIP / PANEL_HALF).powi(2)).sqrt();
        let digits_rule = need + mag + STRIP * h / ln10 + 2.0;
        let order = ((digits_rule / (2.0 * rho.log10())).ceil() as usize + 4).clamp(8, 400);
        let mut panels = ((u_end / (2.0 * PANEL_HALF)).ceil() as usize).max(1);

        let t_w = opts.t.to_precision(wprec);
        let test_x: Vec<BigReal> = (0..=4)
            .map(|k| BigReal::from_f64(h * k as f64 / 4.0, wprec))
            .collect();
        let u_end_w = BigReal::from_f64(u_end, wprec);

        let sample = |panels: usize| -> Vec<(BigReal, BigReal)> {
            let rule = gauss_legendre(order, wprec);
            let pts = composite(&BigReal::zero(wprec), &u_end_w, panels, &rule);
            pts.into_par_iter()
                .map(|(u, w)| {
                    let mut a = w * &phi.phi_unchecked(&u);
                    if !t_w.is_zero() {
                        a *= (&t_w * &u.square()).exp();
                    }
                    (u, a)
                })
                .collect()
        };
        let functionals = |nodes: &[(BigReal, BigReal)]| -> Vec<BigReal> {
            let mut f: Vec<BigReal> = test_x.iter().map(|x| cosine_sum(nodes, x)).collect();
            f.push(
                nodes
                    .iter()
                    .fold(BigReal::zero(wprec), |acc, (u, a)| acc + a * &u.square()),
            );
            f
        };

        let mut f_coarse = functionals(&sample(panels));
        let mut refinements = 0;
        loop {
            let fine = sample(2 * panels);
            let f_fine = functionals(&fine);
            let delta = f_coarse
                .iter()
                .zip(&f_fine)
                .map(|(a, b)| (a - b).abs())
                .fold(BigReal::zero(wprec), BigReal::max);
            panels *= 2;
            refinements += 1;
            if delta <= &eps_w / 4i64 {
                let abs_sum = fine
                    .iter()
                    .fold(BigReal::zero(wprec), |acc, (_, a)| acc + a.abs());
                let rounding = wprec.ulp() * &abs_sum * fine.len() as i64;
                let err_w = &eps_w + &delta + BigReal::from_f64(skipped, wprec) + rounding;
                let scale_w = (BigReal::from_u64(d, wprec) / BigReal::pi(wprec))
                    .powf(&BigReal::ratio(3, 4, wprec));
                log::debug!(
                    "xi {disc}: H = {h}, P_w = {}, U = {u_cut:.3}, end = {u_end:.3}, \
                     {panels} panels x {order}",
                    wprec.digits()
                );
                return Ok(XiEvaluator {
                    disc,
                    prec: p,
                    wprec,
                    t: opts.t.clone(),
                    height: h,
                    nodes: fine,
                    err_w,
                    eps_w,
                    scale_w,
                    info: QuadratureInfo {
                        panels,
                        order,
                        u_end,
                        working_digits: wprec.digits(),
                    },
                });
            }
            if refinements >= MAX_REFINEMENTS {
                return Err(Error::Quadrature {
                    residual: delta.to_decimal_digits(6),
                });
            }
            f_coarse = f_fine;
        }
    }

    pub fn disc(&self) -> FundamentalDiscriminant {
        self.disc
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn working_precision(&self) -> Precision {
        self.wprec
    }

    pub fn t(&self) -> &BigReal {
        &self.t
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn info(&self) -> &QuadratureInfo {
        &self.info
    }

    /// Absolute error bound on `Ξ_t(x)` for `|x| ≤ H`, at working precision.
    pub fn err_w(&self) -> &BigReal {
        &self.err_w
    }

    /// The scaled accuracy target at working precision.
    pub fn eps_w(&self) -> &BigReal {
        &self.eps_w
    }

    /// Absolute error bound on `Ξ_t(x)`, rounded to the user precision.
    pub fn err(&self) -> BigReal {
        self.err_w.to_precision(self.prec)
    }

    /// `(D/π)^{3/4}` at working precision.
    pub fn scale_w(&self) -> &BigReal {
        &self.scale_w
    }

    fn check_height(&self, x: f64) -> Result<()> {
        if x.abs() > self.height * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::Config(format!(
                "|x| = {} exceeds the evaluator height {}",
                x.abs(),
                self.height
            )));
        }
        Ok(())
    }

    /// `Ξ_t(x)` at working precision; `x` must be at working precision.
    pub fn xi_w(&self, x: &BigReal) -> Result<BigReal> {
        self.check_height(x.to_f64())?;
        Ok(cosine_sum(&self.nodes, x))
    }

    /// `k`-th derivative of `Ξ_t` in `x`, at working precision.
    pub fn xi_derivative_w(&self, x: &BigReal, k: u32) -> Result<BigReal> {
        self.check_height(x.to_f64())?;
        let parts: Vec<BigReal> = self
            .nodes
            .par_iter()
            .map(|(u, a)| {
                let ux = u * x;
                let trig = match k % 4 {
                    0 => ux.cos(),
                    1 => -ux.sin(),
                    2 => -ux.cos(),
                    _ => ux.sin(),
                };
                a * &u.powi(k as i32) * &trig
            })
            .collect();
        Ok(crate::bigreal::sum(self.wprec, &parts))
    }

    /// `Ξ_t(x)` rounded to the user precision; `x` at the user precision.
    pub fn xi_t(&self, x: &BigReal) -> Result<BigReal> {
        self.same_precision(x)?;
        Ok(self.xi_w(&x.to_precision(self.wprec))?.to_precision(self.prec))
    }

    fn same_precision(&self, x: &BigReal) -> Result<()> {
        if x.precision() != self.prec {
            return Err(Error::PrecisionMismatch {
                left: self.prec.digits(),
                right: x.precision().digits(),
            });
        }
        Ok(())
    }

    fn require_undeformed(&self, what: &str) -> Result<()> {
        if !self.t.is_zero() {
            return Err(Error::Config(format!("{what} needs heat time 0, got {}", self.t)));
        }
        Ok(())
    }

    /// `(D/π)^{3/4} |Γ(3/4 + ix/2)|` at working precision.
    pub fn z_factor_w(&self, x: &BigReal) -> BigReal {
        &self.scale_w * &ln_abs_gamma_on_line(x).exp()
    }

    /// `Z(x)` at working precision.
    pub fn z_w(&self, x: &BigReal) -> Result<BigReal> {
        self.require_undeformed("z_value")?;
        Ok(self.xi_w(x)? / self.z_factor_w(x))
    }

    /// `Z(x)` rounded to the user precision.
    pub fn z_value(&self, x: &BigReal) -> Result<BigReal> {
        self.same_precision(x)?;
        Ok(self.z_w(&x.to_precision(self.wprec))?.to_precision(self.prec))
    }

    /// Absolute error bound on `Z(x)` at working precision.
    pub fn z_err_w(&self, x: &BigReal) -> BigReal {
        &self.err_w / &self.z_factor_w(x)
    }

    /// Moments at working precision.
    pub fn moments_w(&self) -> Result<MomentPair> {
        self.require_undeformed("moments")?;
        let w = self.wprec;
        let mut xi0 = BigReal::zero(w);
        let mut m2 = BigReal::zero(w);
        for (u, a) in &self.nodes {
            xi0 += a;
            m2 += a * &u.square();
        }
        Ok(MomentPair {
            xi0,
            xi2: -m2,
            // The u² moment inherits the same tests; U² covers its weight.
            err: &self.err_w * &BigReal::from_f64(self.info.u_end.max(1.0).powi(2), w),
        })
    }

    /// `Ξ(0)` and `Ξ″(0) = −∫ u² Φ` at the user precision.
    pub fn moments(&self) -> Result<MomentPair> {
        let m = self.moments_w()?;
        Ok(MomentPair {
            xi0: m.xi0.to_precision(self.prec),
            xi2: m.xi2.to_precision(self.prec),
            err: m.err.to_precision(self.prec),
        })
    }

    /// `(log Z)″(0) = Ξ″(0)/Ξ(0) + (1/4) ψ′(3/4)`.
    pub fn log_z_second(&self) -> Result<BigReal> {
        let m = self.moments_w()?;
        let c = trigamma_quarter(self.wprec).c;
        Ok((&m.xi2 / &m.xi0 + c).to_precision(self.prec))
    }

    /// `(log L)″(0)` along the critical line; the `(D/π)^{it/2}` factor is
    /// linear in `t` in the logarithm, so this equals `(log Z)″(0)`.
    pub fn log_l_second(&self) -> Result<BigReal> {
        self.log_z_second()
    }
}

fn cosine_sum(nodes: &[(BigReal, BigReal)], x: &BigReal) -> BigReal {
    let p = x.precision();
    if x.is_zero() {
        return nodes
            .iter()
            .fold(BigReal::zero(p), |acc, (_, a)| acc + a);
    }
    let parts: Vec<BigReal> = nodes
        .par_chunks(64)
        .map(|chunk| {
            chunk
                .iter()
                .fold(BigReal::zero(p), |acc, (u, a)| acc + a * &(u * x).cos())
        })
        .collect();
    crate::bigreal::sum(p, &parts)
}

/// `Ξ(x)` for one discriminant at heat time 0, convenience wrapper.
pub fn xi_at(disc: FundamentalDiscriminant, x: &BigReal, eps: &BigReal) -> Result<BigReal> {
    let opts = XiOptions::new(x.precision())
        .eps(eps.clone())
        .height(x.to_f64().abs());
    XiEvaluator::new(disc, &opts)?.xi_t(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma_real, reference_l_half};

    fn p(d: u32) -> Precision {
        Precision::new(d).unwrap()
    }

    fn disc(n: i64) -> FundamentalDiscriminant {
        FundamentalDiscriminant::new(n).unwrap()
    }

    #[test]
    fn rejects_large_heat_time() {
        let opts = XiOptions::new(p(30)).t(BigReal::ratio(3, 4, p(30)));
        assert!(XiEvaluator::new(disc(-163), &opts).is_err());
    }

    #[test]
    fn xi0_matches_reference_l_value() {
        let q = p(30);
        let e = XiEvaluator::new(disc(-163), &XiOptions::new(q).eps_str("1e-24").unwrap()).unwrap();
        let m = e.moments().unwrap();
        let l = reference_l_half(&disc(-163).character(), q).unwrap();
        let g = gamma_real(&BigReal::ratio(3, 4, q)).unwrap();
        let scale = (BigReal::from_i64(163, q) / BigReal::pi(q)).powf(&BigReal::ratio(3, 4, q));
        let want = scale * g * l;
        let rel = ((&m.xi0 - &want) / &want).abs().to_f64();
        assert!(rel < 1e-20, "{rel:e}");
        assert!(m.err.to_f64() < 1e-22);
    }

    #[test]
    fn even_in_x_and_beyond_height_rejected() {
        let q = p(30);
        let e = XiEvaluator::new(disc(-163), &XiOptions::new(q).height(7.0)).unwrap();
        for x in [0.1, 1.0, 7.0] {
            let xb = BigReal::from_f64(x, q);
            assert_eq!(e.xi_t(&xb).unwrap(), e.xi_t(&-&xb).unwrap());
        }
        assert!(e.xi_t(&BigReal::from_i64(8, q)).is_err());
    }

    #[test]
    fn first_zero_of_163_brackets() {
        let q = p(30);
        let e = XiEvaluator::new(disc(-163), &XiOptions::new(q)).unwrap();
        let a = e.z_value(&BigReal::parse("0.2029", q).unwrap()).unwrap();
        let b = e.z_value(&BigReal::parse("0.2030", q).unwrap()).unwrap();
        assert!(a.signum() * b.signum() < 0, "{a} {b}");
    }

    #[test]
    fn log_z_second_matches_finite_difference() {
        let q = p(40);
        let e = XiEvaluator::new(disc(-163), &XiOptions::new(q).eps_str("1e-30").unwrap()).unwrap();
        let lz = e.log_z_second().unwrap();
        let h = BigReal::parse("1e-6", q).unwrap();
        let z0 = e.z_value(&BigReal::zero(q)).unwrap().ln();
        let zh = e.z_value(&h).unwrap().ln();
        let fd = (zh * 2i64 - z0 * 2i64) / h.square();
        let rel = ((&fd - &lz) / &lz).abs().to_f64();
        assert!(rel < 1e-6, "fd = {fd}, analytic = {lz}");
    }

    #[test]
    fn refinement_moves_xi0_less_than_err() {
        let q = p(30);
        let a = XiEvaluator::new(disc(-1411), &XiOptions::new(q)).unwrap();
        let b = XiEvaluator::new(disc(-1411), &XiOptions::new(q).eps_str("1e-20").unwrap()).unwrap();
        let ma = a.moments().unwrap();
        let mb = b.moments().unwrap();
        assert!((&ma.xi0 - &mb.xi0).abs() < ma.err);
    }

    #[test]
    fn derivative_matches_difference() {
        let q = p(30);
        let e = XiEvaluator::new(disc(-163), &XiOptions::new(q).height(2.0)).unwrap();
        let w = e.working_precision();
        let x = BigReal::ratio(1, 2, w);
        let h = BigReal::parse("1e-8", w).unwrap();
        let fd = (e.xi_w(&(&x + &h)).unwrap() - e.xi_w(&(&x - &h)).unwrap()) / (&h * 2i64);
        let d1 = e.xi_derivative_w(&x, 1).unwrap();
        assert!(((&fd - &d1) / &d1).abs().to_f64() < 1e-12);
    }
}
