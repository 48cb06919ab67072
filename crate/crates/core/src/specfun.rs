//! Special functions at configurable precision: real Γ, |Γ(3/4 + it/2)|,
//! trigamma, Hurwitz ζ, and a reference evaluation of `L(1/2, χ)` that is
//! independent of the theta-kernel machinery.
//!
//! Every function takes its precision from its arguments and works
//! internally with [`GUARD`] extra digits.

use std::sync::{Mutex, OnceLock};

use rug::{Integer, Rational};

use crate::bigreal::{BigReal, Precision};
use crate::discriminant::KroneckerCharacter;
use crate::error::{Error, Result};

/// Guard digits used internally by every function in this module.
pub const GUARD: u32 = 10;

/// Default largest `D` accepted by [`reference_l_half`].
pub const REFERENCE_CEILING: u64 = 2000;

fn bernoulli_cache() -> &'static Mutex<Vec<Rational>> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Vec::new()))
}

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = +1/2`), exact.
fn bernoulli_upto(n: usize) -> Vec<Rational> {
    let mut cache = bernoulli_cache().lock().unwrap_or_else(|e| e.into_inner());
    if cache.len() <= n {
        // Akiyama–Tanigawa; regenerated from scratch when the cache grows.
        let target = (n + 1).max(2 * cache.len()).max(64);
        let mut a: Vec<Rational> = Vec::with_capacity(target);
        let mut out = Vec::with_capacity(target);
        for m in 0..target {
            a.push(Rational::from((1, m as u64 + 1)));
            for j in (1..=m).rev() {
                let diff = Rational::from(&a[j - 1] - &a[j]);
                a[j - 1] = diff * Integer::from(j);
            }
            out.push(a[0].clone());
        }
        *cache = out;
    }
    cache[..=n].to_vec()
}

/// The even Bernoulli number `B_{2k}`.
pub fn bernoulli_even(k: usize) -> Rational {
    bernoulli_upto(2 * k).swap_remove(2 * k)
}

/// Γ(x) for real `x > 0`, correctly rounded by MPFR.
pub fn gamma_real(x: &BigReal) -> Result<BigReal> {
    if !x.is_sign_positive() {
        return Err(Error::Domain(format!("gamma_real needs x > 0, got {x}")));
    }
    let p = x.precision();
    let wp = p.with_guard(GUARD);
    let v = rug::Float::with_val(wp.bits(), x.as_float().gamma_ref());
    Ok(BigReal::from_float(v, p))
}

/// Number of terms and shift for the Stirling series at `wp` digits.
fn stirling_shift(wp: Precision) -> f64 {
    0.5 * wp.digits() as f64 + 10.0
}

// Minimal complex arithmetic for the Stirling tail.
#[derive(Clone)]
struct Complex {
    re: BigReal,
    im: BigReal,
}

impl Complex {
    fn mul(&self, o: &Complex) -> Complex {
        Complex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn recip(&self) -> Complex {
        let n = self.re.square() + self.im.square();
        Complex {
            re: &self.re / &n,
            im: -(&self.im / &n),
        }
    }
}

/// `Re log Γ(a + ib)` for `a > 0`.
fn re_ln_gamma(a: &BigReal, b: &BigReal) -> BigReal {
    let wp = a.precision();
    let x0 = stirling_shift(wp);
    let shift = (x0 - a.to_f64()).ceil().max(0.0) as i64;

    // log Γ(z) = log Γ(z + K) − Σ_{k<K} log(z + k).
    let b2 = b.square();
    let mut sub = BigReal::zero(wp);
    for k in 0..shift {
        let r = a + k;
        sub += (r.square() + &b2).ln();
    }
    sub = sub / 2;

    let zr = a + shift;
    let modsq = zr.square() + &b2;
    let ln_mod = modsq.ln() / 2;
    let arg = b.atan2(&zr);
    let half = BigReal::ratio(1, 2, wp);
    let two_pi = BigReal::pi(wp) * 2;
    let mut s = (&zr - &half) * &ln_mod - b * &arg - &zr + two_pi.ln() * &half;

    // Σ B_{2m} / (2m(2m−1) z^{2m−1}).
    let z = Complex { re: zr, im: b.clone() };
    let zinv = z.recip();
    let zinv2 = zinv.mul(&zinv);
    let mut zpow = zinv;
    let tol = wp.ulp() * &s.abs().max(BigReal::one(wp));
    let mut m = 1usize;
    loop {
        let b2m = BigReal::from_rational(&bernoulli_even(m), wp);
        let denom = (2 * m * (2 * m - 1)) as i64;
        let term = &b2m * &zpow.re / denom;
        s += &term;
        if term.abs() < tol || m > 400 {
            break;
        }
        zpow = zpow.mul(&zinv2);
        m += 1;
    }
    s - sub
}

/// `|Γ(3/4 + i t/2)|`; even in `t` and decreasing in `|t|`.
pub fn abs_gamma_on_line(t: &BigReal) -> BigReal {
    let p = t.precision();
    let wp = p.with_guard(GUARD);
    let a = BigReal::ratio(3, 4, wp);
    let b = t.to_precision(wp) / 2;
    re_ln_gamma(&a, &b).exp().to_precision(p)
}

/// `log |Γ(3/4 + i t/2)|` at the precision of `t`.
pub fn ln_abs_gamma_on_line(t: &BigReal) -> BigReal {
    let p = t.precision();
    let wp = p.with_guard(GUARD);
    let a = BigReal::ratio(3, 4, wp);
    let b = t.to_precision(wp) / 2;
    re_ln_gamma(&a, &b).to_precision(p)
}

/// ψ′(x) for real `x > 0`.
pub fn trigamma(x: &BigReal) -> Result<BigReal> {
    if !x.is_sign_positive() {
        return Err(Error::Domain(format!("trigamma needs x > 0, got {x}")));
    }
    let p = x.precision();
    let wp = p.with_guard(GUARD);
    let x = x.to_precision(wp);
    let shift = (stirling_shift(wp) - x.to_f64()).ceil().max(0.0) as i64;

    let mut head = BigReal::zero(wp);
    for k in 0..shift {
        head += (&x + k).square().recip();
    }

    // ψ′(y) ~ 1/y + 1/(2y²) + Σ B_{2k} / y^{2k+1}.
    let y = &x + shift;
    let yinv = y.recip();
    let yinv2 = yinv.square();
    let mut tail = &yinv + yinv2.clone() / 2;
    let mut pow = &yinv * &yinv2;
    let tol = wp.ulp() * &tail;
    let mut k = 1usize;
    loop {
        let term = BigReal::from_rational(&bernoulli_even(k), wp) * &pow;
        tail += &term;
        if term.abs() < tol || k > 400 {
            break;
        }
        pow = pow * &yinv2;
        k += 1;
    }
    Ok((head + tail).to_precision(p))
}

/// The constant `(1/4) ψ′(3/4) ≈ 0.635470`.
#[derive(Clone, Debug)]
pub struct TrigammaConstant {
    pub c: BigReal,
}

/// `(1/4) ψ′(3/4)` at precision `p`.
pub fn trigamma_quarter(p: Precision) -> TrigammaConstant {
    let wp = p.with_guard(GUARD);
    let v = trigamma(&BigReal::ratio(3, 4, wp)).expect("3/4 > 0") / 4;
    TrigammaConstant {
        c: v.to_precision(p),
    }
}

/// Hurwitz ζ(s, a) for real `s ≠ 1`, `a > 0`, by Euler–Maclaurin with `n`
/// explicit terms and `m` Bernoulli corrections.
pub fn hurwitz_zeta_em(s: &BigReal, a: &BigReal, n: u32, m: u32) -> Result<BigReal> {
    if !a.is_sign_positive() {
        return Err(Error::Domain(format!("hurwitz_zeta needs a > 0, got {a}")));
    }
    let p = s.precision();
    let one = BigReal::one(p);
    if *s == one {
        return Err(Error::Domain("hurwitz_zeta pole at s = 1".into()));
    }
    let neg_s = -s;
    let mut acc = BigReal::zero(p);
    for k in 0..n {
        acc += (a + k as i64).powf(&neg_s);
    }
    let w = a + n as i64;
    let w_neg_s = w.powf(&neg_s);
    acc += &w * &w_neg_s / (s - &one);
    acc += &w_neg_s / 2;

    // B_{2j}/(2j)! · s(s+1)…(s+2j−2) · w^{−s−2j+1}
    let winv = w.recip();
    let winv2 = winv.square();
    let mut rising = s.clone();
    let mut wpow = &w_neg_s * &winv;
    let mut fact = Integer::from(2);
    for j in 1..=m as usize {
        if j > 1 {
            let k = (2 * j) as i64;
            rising = rising * (s + (k - 3)) * (s + (k - 2));
            wpow = wpow * &winv2;
            fact *= Integer::from(k * (k - 1));
        }
        let coef = bernoulli_even(j) / &fact;
        acc += BigReal::from_rational(&Rational::from(coef), p) * &rising * &wpow;
    }
    Ok(acc)
}

/// Hurwitz ζ(s, a) with orders chosen for full precision.
pub fn hurwitz_zeta(s: &BigReal, a: &BigReal) -> Result<BigReal> {
    let p = s.precision();
    let wp = p.with_guard(GUARD);
    let (n, m) = em_orders(wp);
    hurwitz_zeta_em(&s.to_precision(wp), &a.to_precision(wp), n, m).map(|v| v.to_precision(p))
}

/// Euler–Maclaurin orders giving error below `10^{-digits}` for `0 < s < 2`.
///
/// The remainder after `m` corrections is bounded by roughly
/// `(2m)! / (2π w)^{2m}` times a modest factor, with `w = a + n`.
pub fn em_orders(wp: Precision) -> (u32, u32) {
    let digits = wp.digits() as f64 + 5.0;
    let n = (digits * 0.6).ceil().max(10.0) as u32;
    let w = n as f64;
    let mut m = 1u32;
    let mut log_err = 0.0f64;
    while m < 200 {
        let k = 2.0 * m as f64;
        log_err += ((k - 1.0) * k).ln() - 2.0 * (2.0 * std::f64::consts::PI * w).ln();
        if -log_err / std::f64::consts::LN_10 > digits {
            break;
        }
        m += 1;
    }
    (n, m)
}

/// `L(1/2, χ)` from `D^{-1/2} Σ_{a<D} χ(a) ζ(1/2, a/D)`, at precision `p`.
pub fn reference_l_half(chi: &KroneckerCharacter, p: Precision) -> Result<BigReal> {
    reference_l_half_with_ceiling(chi, p, REFERENCE_CEILING)
}

pub fn reference_l_half_with_ceiling(
    chi: &KroneckerCharacter,
    p: Precision,
    ceiling: u64,
) -> Result<BigReal> {
    let d = chi.period();
    if d > ceiling {
        return Err(Error::ReferenceUnavailable { d, ceiling });
    }
    // The terms are of size √(D/a) and cancel down to O(1).
    let lost = (d as f64).log10().ceil() as u32;
    let wp = p.with_guard(GUARD + lost);
    let (n, m) = em_orders(wp);
    let half = BigReal::ratio(1, 2, wp);
    let dd = BigReal::from_u64(d, wp);
    let mut acc = BigReal::zero(wp);
    for a in 1..d {
        let c = chi.chi(a);
        if c == 0 {
            continue;
        }
        let z = hurwitz_zeta_em(&half, &(BigReal::from_u64(a, wp) / &dd), n, m)?;
        if c > 0 {
            acc += z;
        } else {
            acc -= z;
        }
    }
    Ok((acc / dd.sqrt()).to_precision(p))
}
