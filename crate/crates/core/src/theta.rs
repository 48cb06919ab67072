//! The kernel `Φ(u, χ) = 4 Σ χ(n) n exp(3u/2 − π n² e^{2u} / D)` with its
//! certified truncation: cutoff `U = log(D log(S D²))` and series length
//! `N(u) = ⌈√D e^{−u} √log(S D U)⌉`, where `S = 1/eps`.

use crate::bigreal::{BigReal, Precision};
use crate::discriminant::KroneckerCharacter;
use crate::error::{Error, Result};

/// Truncation of the cosine-transform integral and of the theta series.
#[derive(Clone, Debug)]
pub struct TruncationParams {
    pub d: u64,
    pub eps: BigReal,
    /// `S = 1/eps`; equals 2·10¹⁵ at `eps = 5·10⁻¹⁶`.
    pub scale_const: BigReal,
    /// Integration cutoff `U`.
    pub u_cut: BigReal,
    // log(S·D·U), shared by every N(u).
    log_sdu: f64,
}

impl TruncationParams {
    /// Series length `N(u)`; nonincreasing in `u`, at least 1.
    pub fn n_terms(&self, u: f64) -> u64 {
        let n = (self.d as f64).sqrt() * (-u).exp() * self.log_sdu.sqrt();
        (n.ceil() as u64).max(1)
    }
}

/// `U` and `N(·)` for modulus `d` and target accuracy `eps`.
pub fn truncation_params(d: u64, eps: &BigReal) -> Result<TruncationParams> {
    if d < 3 {
        return Err(Error::Config(format!("modulus {d} < 3")));
    }
    let p = eps.precision();
    let one = BigReal::one(p);
    if !eps.is_sign_positive() || *eps >= one {
        return Err(Error::Config(format!("eps must lie in (0, 1), got {eps}")));
    }
    let floor = BigReal::from_i64(10, p).powi(3 - p.digits() as i32);
    if *eps < floor {
        return Err(Error::Config(format!(
            "eps = {eps} is below 10^(3-P) for P = {}",
            p.digits()
        )));
    }
    let dd = BigReal::from_u64(d, p);
    let scale_const = eps.recip();
    let u_cut = (&dd * (&scale_const * &dd.square()).ln()).ln();
    let log_sdu = (&scale_const * &dd * &u_cut).ln().to_f64();
    Ok(TruncationParams {
        d,
        eps: eps.clone(),
        scale_const,
        u_cut,
        log_sdu,
    })
}

/// `log` of a pointwise bound on `e^{t u²} |Φ(u)|`, valid where
/// `a = π e^{2u}/D ≥ 1/2`: `Σ n e^{−a n²} ≤ e^{−a}(1 + 1/(2a))`.
/// Returns `+∞` where the bound does not apply.
pub fn ln_phi_bound(d: u64, u: f64, t: f64) -> f64 {
    let a = std::f64::consts::PI * (2.0 * u).exp() / d as f64;
    if a < 0.5 {
        return f64::INFINITY;
    }
    4f64.ln() + 1.5 * u + t * u * u - a + (1.0 + 0.5 / a).ln()
}

/// Evaluates `Φ(u, χ)` at a fixed working precision.
#[derive(Clone, Debug)]
pub struct PhiEvaluator {
    chi: KroneckerCharacter,
    params: TruncationParams,
    prec: Precision,
    pi_over_d: BigReal,
}

impl PhiEvaluator {
    /// Precision of the produced values is the precision of `eps`.
    pub fn new(chi: KroneckerCharacter, eps: &BigReal) -> Result<Self> {
        let params = truncation_params(chi.period(), eps)?;
        let prec = eps.precision();
        let pi_over_d = BigReal::pi(prec) / BigReal::from_u64(chi.period(), prec);
        Ok(PhiEvaluator {
            chi,
            params,
            prec,
            pi_over_d,
        })
    }

    pub fn params(&self) -> &TruncationParams {
        &self.params
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn character(&self) -> &KroneckerCharacter {
        &self.chi
    }

    /// `Φ(u)` for `u ≥ 0`, with truncation error below `eps / U`.
    pub fn phi(&self, u: &BigReal) -> Result<BigReal> {
        if u.is_sign_negative() {
            return Err(Error::Domain(format!("phi needs u >= 0, got {u}")));
        }
        Ok(self.phi_terms(u, None))
    }

    /// `Φ(u)` without the sign check on `u`.
    pub(crate) fn phi_unchecked(&self, u: &BigReal) -> BigReal {
        self.phi_terms(u, None)
    }

    /// `Φ(u)` summed over exactly `n` terms with no early exit.
    pub fn phi_with_terms(&self, u: &BigReal, n: u64) -> BigReal {
        self.phi_terms(u, Some(n))
    }

    fn phi_terms(&self, u: &BigReal, fixed: Option<u64>) -> BigReal {
        let p = self.prec;
        let uf = u.to_f64();
        let n_max = fixed.unwrap_or_else(|| self.params.n_terms(uf));

        let a = &self.pi_over_d * &(u * 2i64).exp();
        let q = (-&a).exp();
        let q2 = q.square();
        let lead = (u * 3i64 / 2).exp() * 4i64;

        // Terms below this (before the 4e^{3u/2} factor) are negligible once
        // the ratio of consecutive terms is at most 1/2.
        let skip = fixed.is_none().then(|| {
            &self.params.eps / &self.params.u_cut / BigReal::from_u64(n_max, p) / &lead
        });
        let peak = (0.5 / a.to_f64()).sqrt();

        let mut qn2 = q.clone();
        let mut step = &q * &q2;
        let mut acc = BigReal::zero(p);
        for n in 1..=n_max {
            let term = &qn2 * n as i64;
            match self.chi.chi(n) {
                1 => acc += &term,
                -1 => acc -= &term,
                _ => {}
            }
            if let Some(skip) = &skip {
                if n as f64 > peak && step.to_f64() <= 0.4 && term < *skip {
                    break;
                }
            }
            qn2 *= &step;
            step *= &q2;
        }
        acc * lead
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discriminant::FundamentalDiscriminant;

    fn p(d: u32) -> Precision {
        Precision::new(d).unwrap()
    }

    fn eval(neg_d: i64, eps: &str, digits: u32) -> PhiEvaluator {
        let chi = FundamentalDiscriminant::new(neg_d).unwrap().character();
        PhiEvaluator::new(chi, &BigReal::parse(eps, p(digits)).unwrap()).unwrap()
    }

    #[test]
    fn cutoff_matches_closed_form() {
        let d = 115147u64;
        let tp = truncation_params(d, &BigReal::parse("5e-16", p(30)).unwrap()).unwrap();
        let want = (d as f64 * (2e15 * (d as f64).powi(2)).ln()).ln();
        assert!((tp.u_cut.to_f64() - want).abs() < 1e-12);
        assert!(tp.n_terms(0.0) >= tp.n_terms(1.0));
        assert!(tp.n_terms(1.0) >= tp.n_terms(tp.u_cut.to_f64()));
    }

    #[test]
    fn eps_floor_is_enforced() {
        assert!(truncation_params(163, &BigReal::parse("1e-28", p(30)).unwrap()).is_err());
        assert!(truncation_params(163, &BigReal::parse("1e-27", p(30)).unwrap()).is_ok());
        assert!(truncation_params(163, &BigReal::parse("2", p(30)).unwrap()).is_err());
        assert!(truncation_params(2, &BigReal::parse("1e-10", p(30)).unwrap()).is_err());
    }

    #[test]
    fn negative_u_is_rejected() {
        let e = eval(-163, "5e-16", 30);
        assert!(e.phi(&BigReal::from_i64(-1, p(30))).is_err());
    }

    #[test]
    fn crude_bound_holds() {
        for neg_d in [-3, -163, -1411, -17923] {
            let e = eval(neg_d, "5e-16", 30);
            let d = e.params().d as f64;
            for u in [0.0f64, 1.0, 2.0, e.params().u_cut.to_f64()] {
                let ub = BigReal::from_f64(u, p(30));
                let v = e.phi(&ub).unwrap().abs();
                let db = BigReal::from_f64(d, p(30));
                let bound = &db * &(-((&ub * 2i64).exp() / &db)).exp();
                assert!(v < bound, "-D = {neg_d}, u = {u}: {v} >= {bound}");
            }
        }
    }

    #[test]
    fn truncated_series_matches_long_sum() {
        let e = eval(-163, "5e-16", 30);
        let eps = e.params().eps.to_f64();
        for u in [0.0, 0.3, 1.1] {
            let ub = BigReal::from_f64(u, p(30));
            let n4 = 4 * e.params().n_terms(u);
            let a = e.phi(&ub).unwrap();
            let b = e.phi_with_terms(&ub, n4);
            assert!((&a - &b).abs().to_f64() < eps, "u = {u}");
        }
    }

    #[test]
    fn tail_above_cutoff_is_negligible() {
        // ∫_U^∞ D exp(−e^{2u}/D) du by the trapezoid rule on a fine grid.
        let d = 163.0f64;
        let tp = truncation_params(163, &BigReal::parse("5e-16", p(30)).unwrap()).unwrap();
        let u0 = tp.u_cut.to_f64();
        let h = 1e-4;
        let f = |u: f64| d * (-(2.0 * u).exp() / d).exp();
        let tail: f64 = (0..100_000).map(|k| f(u0 + (k as f64 + 0.5) * h) * h).sum();
        assert!(tail < 5e-16, "{tail:e}");
    }

    #[test]
    fn decays_monotonically_past_cutoff() {
        let e = eval(-163, "5e-16", 30);
        let u0 = e.params().u_cut.clone();
        let mut prev = e.phi(&u0).unwrap().abs();
        assert!(prev < e.params().eps);
        for k in 1..10 {
            let v = e.phi(&(&u0 + &BigReal::ratio(k, 10, p(30)))).unwrap().abs();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn pointwise_bound_dominates() {
        let e = eval(-1411, "1e-25", 30);
        for u in [2.0f64, 2.5, 3.0, 3.5] {
            let v = e.phi(&BigReal::from_f64(u, p(30))).unwrap().abs().to_f64();
            let b = ln_phi_bound(1411, u, 0.0);
            assert!(v.ln() <= b, "u = {u}");
        }
        assert!(ln_phi_bound(1411, 0.0, 0.0).is_infinite());
    }

    #[test]
    fn halving_eps_moves_phi_less_than_eps() {
        let coarse = eval(-1411, "1e-16", 30);
        let fine = eval(-1411, "5e-17", 30);
        for k in 0..20 {
            let ub = BigReal::from_f64(0.2 * k as f64, p(30));
            let a = coarse.phi(&ub).unwrap();
            let b = fine.phi(&ub).unwrap();
            assert!((&a - &b).abs().to_f64() < 1e-16, "u = {}", 0.2 * k as f64);
        }
    }
}
