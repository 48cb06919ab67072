//! Motion of the zeros of `Ξ_t` under the backward heat equation.
//!
//! The positive zeros `x_1 < … < x_m` obey
//! `x_k′ = 1/x_k + Σ_{j≠k} [2/(x_k − x_j) + 2/(x_k + x_j)]`, where the `1/x_k`
//! term is the mirror image `x_{−k} = −x_k` and the sum is truncated to the
//! first `m` zeros. Integration uses the Dormand–Prince 5(4) pair with PI step
//! control and a step cap proportional to the squared minimum gap.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::bigreal::{BigReal, Precision};
use crate::discriminant::FundamentalDiscriminant;
use crate::error::{Error, Result};
use crate::xi::{XiEvaluator, XiOptions};
use crate::zeros::{find_zeros, find_zeros_t, ZeroOptions, ZeroTarget};

/// Largest forward heat time accepted by [`integrate`].
pub const MAX_T: f64 = 1.0;

/// Positions of the positive zeros at one heat time.
#[derive(Clone, Debug, Serialize)]
pub struct FlowState {
    pub t: BigReal,
    pub x: Vec<BigReal>,
    /// `min(2 x_1, min_j (x_{j+1} − x_j))`.
    pub min_gap: BigReal,
}

fn min_gap(x: &[BigReal]) -> Option<BigReal> {
    let first = x.first()? * 2i64;
    Some(
        x.windows(2)
            .map(|w| &w[1] - &w[0])
            .fold(first, |a, g| a.min(g)),
    )
}

impl FlowState {
    /// Requires `0 < x_1 < … < x_m`, all at the precision of `t`.
    pub fn new(t: BigReal, x: Vec<BigReal>) -> Result<Self> {
        let p = t.precision();
        if x.iter().any(|v| v.precision() != p) {
            return Err(Error::Precondition("positions and time differ in precision".into()));
        }
        let gap = min_gap(&x).ok_or_else(|| Error::Precondition("no zeros".into()))?;
        if !gap.is_sign_positive() {
            return Err(Error::Precondition(
                "positions must be positive and strictly increasing".into(),
            ));
        }
        Ok(FlowState { t, x, min_gap: gap })
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn precision(&self) -> Precision {
        self.t.precision()
    }

    /// `f = Σ_{j=2..m} 4/(x_j² − x_1²)`.
    pub fn f(&self) -> BigReal {
        let x1s = self.x[0].square();
        self.x[1..]
            .iter()
            .fold(BigReal::zero(self.precision()), |a, xj| {
                a + (xj.square() - &x1s).recip() * 4i64
            })
    }

    /// `g = 2 Σ_{j=2..m} [1/(x_j + x_1)² + 1/(x_j − x_1)²]`.
    pub fn g(&self) -> BigReal {
        let x1 = &self.x[0];
        let s = self.x[1..]
            .iter()
            .fold(BigReal::zero(self.precision()), |a, xj| {
                a + (xj + x1).square().recip() + (xj - x1).square().recip()
            });
        s * 2i64
    }

    // |∂g/∂x| summed over all coordinates.
    fn g_sensitivity(&self) -> f64 {
        let x1 = self.x[0].to_f64();
        self.x[1..]
            .iter()
            .map(|xj| {
                let xj = xj.to_f64();
                8.0 * ((xj + x1).powi(-3) + (xj - x1).abs().powi(-3))
            })
            .sum()
    }
}

/// `x_k′` for every `k`.
pub fn derivative(s: &FlowState) -> Result<Vec<BigReal>> {
    derivative_of(&s.x)
}

fn derivative_of(x: &[BigReal]) -> Result<Vec<BigReal>> {
    x.par_iter()
        .enumerate()
        .map(|(k, xk)| {
            if xk.is_zero() {
                return Err(Error::Singular(format!("x_{} = 0", k + 1)));
            }
            let mut v = xk.recip();
            for (j, xj) in x.iter().enumerate() {
                if j == k {
                    continue;
                }
                let diff = xk - xj;
                let sum = xk + xj;
                if diff.is_zero() || sum.is_zero() {
                    return Err(Error::Singular(format!(
                        "x_{} and x_{} coincide up to sign",
                        k + 1,
                        j + 1
                    )));
                }
                v += (diff.recip() + sum.recip()) * 2i64;
            }
            Ok(v)
        })
        .collect()
}

/// Contribution of omitted zeros to the velocity of a zero at `x`,
/// `Σ_{j>m} 4x/(x_j² − x²)`: explicit over known zeros beyond the
/// truncation, then the density integral `(4x/2π)(log(D Y/2π) + 1)/Y` above
/// the last known one `Y`.
#[derive(Clone, Debug)]
pub struct TailModel {
    pub d: u64,
    pub zeros: Vec<f64>,
}

impl TailModel {
    pub fn rate(&self, x: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        let explicit: f64 = self
            .zeros
            .iter()
            .map(|&y| 4.0 * x / (y * y - x * x).abs())
            .sum();
        let y = self.zeros.last().copied().unwrap_or(x + 1.0).max(x + 1.0);
        let rest = 4.0 * x / tau * ((self.d as f64 * y / tau).ln().max(0.0) + 1.0) / y
            * (y * y / (y * y - x * x));
        explicit + rest
    }
}

/// Settings for [`integrate`].
#[derive(Clone, Debug)]
pub struct FlowOptions {
    /// Per-step absolute error bound.
    pub tol: BigReal,
    /// Stop when the minimum gap falls below this; defaults to `10·tol`.
    pub collision_tol: Option<BigReal>,
    /// Times at which states are recorded, between start and end inclusive.
    pub samples: Vec<BigReal>,
    /// Drift model for the omitted zeros.
    pub tail: Option<TailModel>,
}

impl FlowOptions {
    pub fn new(tol: BigReal) -> Self {
        FlowOptions {
            tol,
            collision_tol: None,
            samples: Vec::new(),
            tail: None,
        }
    }
}

/// Where a run stopped because two zeros (or `x_1` and its mirror) met.
#[derive(Clone, Debug, Serialize)]
pub struct CollisionStop {
    pub t_stop: BigReal,
    pub min_gap: BigReal,
}

/// Result of [`integrate`].
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub samples: Vec<FlowState>,
    pub final_state: FlowState,
    pub collision: Option<CollisionStop>,
    pub steps: usize,
    pub rejected: usize,
    /// Per zero, the largest tail drift rate met along the path.
    pub max_tail_rate: Option<Vec<f64>>,
}

impl Trajectory {
    /// Drift allowance per zero at heat time `t`: `2 |t − t_0| · max rate`.
    pub fn drift_allowance(&self, t0: &BigReal, t: &BigReal) -> Option<Vec<f64>> {
        let dt = (t - t0).abs().to_f64();
        self.max_tail_rate
            .as_ref()
            .map(|r| r.iter().map(|v| 2.0 * dt * v).collect())
    }

    /// The trajectory, or [`Error::Collision`] if the run stopped early.
    pub fn into_result(self) -> Result<Trajectory> {
        match &self.collision {
            Some(c) => Err(Error::Collision {
                t_stop: c.t_stop.to_decimal_string(),
                min_gap: c.min_gap.to_decimal_digits(6),
            }),
            None => Ok(self),
        }
    }

    /// CSV with header `t,x_1,…,x_M` and one row per sample.
    pub fn to_csv(&self) -> String {
        states_to_csv(&self.samples)
    }
}

/// CSV with header `t,x_1,…,x_M`.
pub fn states_to_csv(states: &[FlowState]) -> String {
    let m = states.iter().map(|s| s.m()).max().unwrap_or(0);
    let mut out = String::from("t");
    for k in 1..=m {
        write!(out, ",x_{k}").expect("string write");
    }
    out.push('\n');
    for s in states {
        out.push_str(&s.t.to_decimal_string());
        for x in &s.x {
            out.push(',');
            out.push_str(&x.to_decimal_string());
        }
        out.push('\n');
    }
    out
}

struct Tableau {
    a: Vec<Vec<BigReal>>,
    b: Vec<BigReal>,
    e: Vec<BigReal>,
}

fn tableau(p: Precision) -> Tableau {
    let r = |n: i64, d: i64| BigReal::ratio(n, d, p);
    let a = vec![
        vec![],
        vec![r(1, 5)],
        vec![r(3, 40), r(9, 40)],
        vec![r(44, 45), r(-56, 15), r(32, 9)],
        vec![r(19372, 6561), r(-25360, 2187), r(64448, 6561), r(-212, 729)],
        vec![
            r(9017, 3168),
            r(-355, 33),
            r(46732, 5247),
            r(49, 176),
            r(-5103, 18656),
        ],
    ];
    let b = vec![
        r(35, 384),
        r(0, 1),
        r(500, 1113),
        r(125, 192),
        r(-2187, 6784),
        r(11, 84),
    ];
    let e = vec![
        r(71, 57600),
        r(0, 1),
        r(-71, 16695),
        r(71, 1920),
        r(-17253, 339200),
        r(22, 525),
        r(-1, 40),
    ];
    Tableau { a, b, e }
}

fn combine(x: &[BigReal], h: &BigReal, coeffs: &[BigReal], ks: &[Vec<BigReal>]) -> Vec<BigReal> {
    (0..x.len())
        .map(|i| {
            let s = coeffs
                .iter()
                .zip(ks)
                .filter(|(c, _)| !c.is_zero())
                .fold(BigReal::zero(h.precision()), |a, (c, k)| a + c * &k[i]);
            &x[i] + &(h * &s)
        })
        .collect()
}

fn sorted_positive(x: &[BigReal]) -> bool {
    x[0].is_sign_positive() && x.windows(2).all(|w| w[0] < w[1])
}

/// Integrates from `s0.t` to `t_end`, recording states at `opts.samples`.
/// Stops early, with `collision` set, if the minimum gap falls below the
/// collision tolerance or the gap-limited step drops below the resolution
/// of `t`.
pub fn integrate(s0: &FlowState, t_end: &BigReal, opts: &FlowOptions) -> Result<Trajectory> {
    let p = s0.precision();
    let tol = opts.tol.to_precision(p);
    let floor = BigReal::from_i64(10, p).powi(3 - p.digits() as i32);
    if tol < floor {
        return Err(Error::Config(format!(
            "tol = {tol} is below 10^(3-P) for P = {}",
            p.digits()
        )));
    }
    if t_end.to_f64() > MAX_T {
        return Err(Error::Config(format!("t_end = {t_end} exceeds {MAX_T}")));
    }
    if *t_end < s0.t {
        let g = s0.g();
        if g.is_sign_positive() && (&s0.t - t_end).to_f64() * 8.0 * g.to_f64() > 1.0 {
            return Err(Error::Config(format!(
                "backward span {} exceeds 1/(8 g) = {}",
                (&s0.t - t_end).to_decimal_digits(6),
                (g * 8i64).recip().to_decimal_digits(6)
            )));
        }
    }
    let coll = opts
        .collision_tol
        .clone()
        .map(|c| c.to_precision(p))
        .unwrap_or_else(|| &tol * 10i64);
    if s0.min_gap <= coll {
        return Err(Error::Precondition(format!(
            "initial minimum gap {} is within the collision tolerance",
            s0.min_gap.to_decimal_digits(6)
        )));
    }
    let dir: i64 = if *t_end >= s0.t { 1 } else { -1 };
    let mut targets: Vec<BigReal> = Vec::with_capacity(opts.samples.len());
    for t in &opts.samples {
        let t = t.to_precision(p);
        let inside = if dir > 0 {
            t >= s0.t && t <= *t_end
        } else {
            t <= s0.t && t >= *t_end
        };
        if !inside {
            return Err(Error::Config(format!("sample time {t} outside the run")));
        }
        targets.push(t);
    }
    targets.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    if dir < 0 {
        targets.reverse();
    }
    targets.dedup_by(|a, b| a == b);

    let tab = tableau(p);
    let tol_f = tol.to_f64();
    let span = (t_end - &s0.t).abs().to_f64().max(f64::MIN_POSITIVE);
    let mut state = s0.clone();
    let mut samples = Vec::with_capacity(targets.len());
    let mut next = 0;
    while next < targets.len() && targets[next] == state.t {
        samples.push(state.clone());
        next += 1;
    }
    let mut rates: Option<Vec<f64>> = opts.tail.as_ref().map(|tm| {
        state.x.iter().map(|x| tm.rate(x.to_f64())).collect()
    });
    let mut steps = 0;
    let mut rejected = 0;
    let mut k1 = derivative(&state)?;
    let mut h_mag = {
        let g = state.min_gap.to_f64();
        let vmax = k1.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
        (0.01 * g / vmax.max(1e-300)).min(0.05 * g * g).max(1e-300)
    };
    let mut err_prev = 1e-4f64;
    let underflow = BigReal::from_i64(10, p).powi(3 - p.digits() as i32).to_f64();

    while state.t != *t_end {
        let stop = targets.get(next).unwrap_or(t_end).clone();
        let remaining = (&stop - &state.t).abs();
        let gap = state.min_gap.to_f64();
        let cap = 0.1 * gap * gap / 2.0;
        let mut hm = h_mag.min(cap);
        let lands = remaining.to_f64() <= hm;
        if lands {
            hm = remaining.to_f64();
        }
        if hm == 0.0 || hm < underflow * state.t.to_f64().abs() {
            if cap <= h_mag {
                // The gap cap binds below the time resolution: the pair has
                // met as closely as this precision can follow.
                let stop = CollisionStop {
                    t_stop: state.t.clone(),
                    min_gap: state.min_gap.clone(),
                };
                return Ok(Trajectory {
                    samples,
                    final_state: state,
                    collision: Some(stop),
                    steps,
                    rejected,
                    max_tail_rate: rates,
                });
            }
            return Err(Error::StepUnderflow {
                t: state.t.to_decimal_string(),
            });
        }
        let h = if lands {
            &stop - &state.t
        } else {
            BigReal::from_f64(hm * dir as f64, p)
        };

        let mut ks = vec![k1.clone()];
        let mut failed = None;
        for i in 1..6 {
            let xi = combine(&state.x, &h, &tab.a[i], &ks);
            match derivative_of(&xi) {
                Ok(k) => ks.push(k),
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        let proposal = if failed.is_none() {
            let x5 = combine(&state.x, &h, &tab.b, &ks);
            if sorted_positive(&x5) {
                derivative_of(&x5).ok().map(|k7| (x5, k7))
            } else {
                None
            }
        } else {
            None
        };
        let Some((x5, k7)) = proposal else {
            rejected += 1;
            h_mag = hm * 0.25;
            continue;
        };
        let mut ks_all = ks;
        ks_all.push(k7.clone());
        let err = (0..x5.len())
            .map(|i| {
                let s = tab
                    .e
                    .iter()
                    .zip(&ks_all)
                    .filter(|(c, _)| !c.is_zero())
                    .fold(BigReal::zero(p), |a, (c, k)| a + c * &k[i]);
                (&h * &s).abs().to_f64()
            })
            .fold(0.0, f64::max)
            / (tol_f * (hm / span.min(gap * gap)).min(1.0));

        if err > 1.0 {
            rejected += 1;
            h_mag = hm * (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        steps += 1;
        let t_new = if lands { stop.clone() } else { &state.t + &h };
        let gap_new = min_gap(&x5).expect("nonempty");
        state = FlowState {
            t: t_new,
            x: x5,
            min_gap: gap_new,
        };
        k1 = k7;
        if let (Some(r), Some(tm)) = (rates.as_mut(), opts.tail.as_ref()) {
            for (rk, x) in r.iter_mut().zip(&state.x) {
                *rk = rk.max(tm.rate(x.to_f64()));
            }
        }
        let e = err.max(1e-10);
        let fac = 0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
        h_mag = if lands {
            h_mag.max(hm)
        } else {
            hm * fac.clamp(0.2, 5.0)
        };
        err_prev = e;

        if state.min_gap <= coll {
            let stop = CollisionStop {
                t_stop: state.t.clone(),
                min_gap: state.min_gap.clone(),
            };
            return Ok(Trajectory {
                samples,
                final_state: state,
                collision: Some(stop),
                steps,
                rejected,
                max_tail_rate: rates,
            });
        }
        while next < targets.len() && targets[next] == state.t {
            samples.push(state.clone());
            next += 1;
        }
    }
    Ok(Trajectory {
        samples,
        final_state: state,
        collision: None,
        steps,
        rejected,
        max_tail_rate: rates,
    })
}

/// `f`, `g` and a finite-difference check of `g′ ≥ −8 g²`.
#[derive(Clone, Debug, Serialize)]
pub struct FlowDiagnostics {
    pub t: BigReal,
    pub f: BigReal,
    pub g: BigReal,
    pub g_prime_fd: BigReal,
    /// Allowance for finite-difference and integration error in `g′`.
    pub slack: BigReal,
    pub decay_bound_ok: bool,
}

/// Finite-difference scale `tol^{1/3} · min(1, min_gap²)`.
pub fn default_fd_scale(s: &FlowState, tol: &BigReal) -> BigReal {
    let g = s.min_gap.to_f64();
    BigReal::from_f64(tol.to_f64().cbrt() * (g * g).min(1.0), s.precision())
}

/// Diagnostics at `s`, with `g′` from centered differences over `±h`.
pub fn diagnostics(s: &FlowState, h: &BigReal, tol: &BigReal) -> Result<FlowDiagnostics> {
    let p = s.precision();
    let f = s.f();
    let g = s.g();
    if s.m() < 2 {
        let z = BigReal::zero(p);
        return Ok(FlowDiagnostics {
            t: s.t.clone(),
            f,
            g,
            g_prime_fd: z.clone(),
            slack: z,
            decay_bound_ok: true,
        });
    }
    let opts = FlowOptions::new(tol.clone());
    let run = |dt: &BigReal| -> Result<BigReal> {
        let tr = integrate(s, &(&s.t + dt), &opts)?.into_result()?;
        Ok(tr.final_state.g())
    };
    let gp = run(h)?;
    let gm = run(&-h)?;
    let gp2 = run(&(h * 2i64))?;
    let gm2 = run(&-(h * 2i64))?;
    let d1 = (&gp - &gm) / (h * 2i64);
    let d2 = (&gp2 - &gm2) / (h * 4i64);
    // Richardson difference bounds the O(h²) error; the second term covers
    // integration error in each endpoint.
    let integ = BigReal::from_f64(4.0 * tol.to_f64() * s.g_sensitivity(), p) / h;
    let slack = (&d1 - &d2).abs() * 2i64 + integ;
    let rhs = -(g.square() * 8i64) - &slack;
    let decay_bound_ok = d1 >= rhs;
    Ok(FlowDiagnostics {
        t: s.t.clone(),
        f,
        g,
        g_prime_fd: d1,
        slack,
        decay_bound_ok,
    })
}

/// Verdict of [`collision_discriminant`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionClass {
    /// Backward value negative, forward positive: the double root splits
    /// into a complex pair for `t < t_0` and two real roots for `t > t_0`.
    ComplexBackward,
    /// The derivative estimates are dominated by their error.
    Inconclusive,
}

/// Local expansion around a candidate double root.
#[derive(Clone, Debug, Serialize)]
pub struct CollisionDiscriminant {
    pub xi2: BigReal,
    pub xi3: BigReal,
    pub xi4: BigReal,
    /// `−2δ²Ξ″² + δ⁴(Ξ‴² − Ξ″Ξ⁗)`.
    pub backward: BigReal,
    /// `2δ²Ξ″² + δ⁴(Ξ‴² − Ξ″Ξ⁗)`.
    pub forward: BigReal,
    pub class: CollisionClass,
}

/// Discriminant of the quadratic in `ε` approximating `Ξ_{t_0 ± δ²}(x_0 + ε)`
/// when `x_0` is a double root of `Ξ_{t_0}`; derivatives by central
/// differences of `f` with step `h`, `noise` an absolute error bound on `f`.
pub fn discriminant_from_fn<F>(
    f: F,
    x0: &BigReal,
    h: &BigReal,
    delta: &BigReal,
    noise: &BigReal,
) -> Result<CollisionDiscriminant>
where
    F: Fn(&BigReal) -> Result<BigReal>,
{
    let at = |k: i64| f(&(x0 + &(h * k)));
    let (m2, m1, c, p1, p2) = (at(-2)?, at(-1)?, at(0)?, at(1)?, at(2)?);
    let h2 = h.square();
    let xi2 = (&p1 - &(&c * 2i64) + &m1) / &h2;
    let xi3 = (&p2 - &(&p1 * 2i64) + &(&m1 * 2i64) - &m2) / (&h2 * h * 2i64);
    let xi4 = (&p2 - &(&p1 * 4i64) + &(&c * 6i64) - &(&m1 * 4i64) + &m2) / h2.square();
    let d2 = delta.square();
    let lead = &d2 * &xi2.square() * 2i64;
    let quart = d2.square() * (xi3.square() - &xi2 * &xi4);
    let backward = &quart - &lead;
    let forward = &quart + &lead;
    // Noise in the second difference, with a factor 2 margin.
    let e2 = noise * 8i64 / &h2;
    let class = if xi2.abs() > e2 && backward.is_sign_negative() && forward.is_sign_positive() {
        CollisionClass::ComplexBackward
    } else {
        CollisionClass::Inconclusive
    };
    Ok(CollisionDiscriminant {
        xi2,
        xi3,
        xi4,
        backward,
        forward,
        class,
    })
}

/// [`discriminant_from_fn`] applied to `Ξ_{t_0}` with `δ = h`.
pub fn collision_discriminant(
    disc: FundamentalDiscriminant,
    t0: &BigReal,
    x0: &BigReal,
    h: &BigReal,
) -> Result<CollisionDiscriminant> {
    let p = t0.precision();
    let reach = x0.to_f64().abs() + 3.0 * h.to_f64().abs();
    let opts = XiOptions::new(p).t(t0.clone()).height(reach);
    let e = XiEvaluator::new(disc, &opts)?;
    let wp = e.working_precision();
    let noise = e.err_w().clone();
    let hw = h.to_precision(wp);
    let r = discriminant_from_fn(
        |x| e.xi_w(&x.abs()),
        &x0.to_precision(wp),
        &hw,
        &hw,
        &noise,
    )?;
    Ok(CollisionDiscriminant {
        xi2: r.xi2.to_precision(p),
        xi3: r.xi3.to_precision(p),
        xi4: r.xi4.to_precision(p),
        backward: r.backward.to_precision(p),
        forward: r.forward.to_precision(p),
        class: r.class,
    })
}

/// Number of sign changes of `f` on `n + 1` equally spaced points of
/// `[x0 − 2δ, x0 + 2δ]`.
pub fn sign_changes<F>(f: F, x0: &BigReal, delta: &BigReal, n: usize) -> Result<usize>
where
    F: Fn(&BigReal) -> Result<BigReal>,
{
    let step = delta * 4i64 / n as i64;
    let lo = x0 - &(delta * 2i64);
    let mut prev = 0i8;
    let mut count = 0;
    for k in 0..=n {
        let s = f(&(&lo + &(&step * k as i64)))?.signum();
        if s != 0 {
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
    }
    Ok(count)
}

/// Settings for [`oracle_check`].
#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub precision: Precision,
    pub eps: BigReal,
    /// Integrator tolerance.
    pub tol: BigReal,
    /// Root-finding tolerance for the quadrature zeros.
    pub zero_tol: BigReal,
    /// Zeros beyond `m` used by the drift model.
    pub tail_zeros: usize,
}

impl OracleConfig {
    pub fn new(precision: Precision) -> Self {
        OracleConfig {
            precision,
            eps: BigReal::parse("5e-16", precision).expect("literal"),
            tol: BigReal::parse("1e-14", precision).expect("literal"),
            zero_tol: BigReal::parse("1e-12", precision).expect("literal"),
            tail_zeros: 32,
        }
    }
}

/// ODE positions against quadrature roots of `Ξ_t` at one time.
#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub t: BigReal,
    pub ode: Vec<BigReal>,
    pub roots: Vec<BigReal>,
    pub gaps: Vec<f64>,
    /// `max(10⁻⁶, drift allowance)` per zero.
    pub allowance: Vec<f64>,
    pub ok: bool,
}

/// Comparison of the truncated flow against direct root finding.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub disc: FundamentalDiscriminant,
    pub m: usize,
    pub rows: Vec<OracleRow>,
    pub trajectory: Trajectory,
}

impl OracleReport {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }
}

/// Seeds the flow with the first `m` zeros, integrates to each of `times`,
/// and compares with the zeros of `Ξ_t` found by quadrature.
pub fn oracle_check(
    disc: FundamentalDiscriminant,
    m: usize,
    times: &[BigReal],
    cfg: &OracleConfig,
) -> Result<OracleReport> {
    let p = cfg.precision;
    let zo = ZeroOptions {
        precision: p,
        eps: cfg.eps.clone(),
        tol: cfg.zero_tol.clone(),
        target: ZeroTarget::Count(m + cfg.tail_zeros),
    };
    let zl = find_zeros(disc, &zo)?;
    let t0 = BigReal::zero(p);
    let s0 = FlowState::new(t0.clone(), zl.gammas[..m].to_vec())?;
    let tail = TailModel {
        d: disc.d(),
        zeros: zl.gammas[m..].iter().map(|g| g.to_f64()).collect(),
    };
    let t_end = times
        .iter()
        .cloned()
        .fold(t0.clone(), |a, t| a.max(t.to_precision(p)));
    let mut opts = FlowOptions::new(cfg.tol.clone());
    opts.samples = times.to_vec();
    opts.tail = Some(tail);
    let traj = integrate(&s0, &t_end, &opts)?.into_result()?;

    let mut rows = Vec::with_capacity(times.len());
    for s in &traj.samples {
        let zo_t = ZeroOptions {
            target: ZeroTarget::Count(m),
            ..zo.clone()
        };
        let roots = find_zeros_t(disc, &zo_t, &s.t)?.gammas;
        let drift = traj.drift_allowance(&t0, &s.t).expect("tail model set");
        let gaps: Vec<f64> = s
            .x
            .iter()
            .zip(&roots)
            .map(|(a, b)| (a - b).abs().to_f64())
            .collect();
        let allowance: Vec<f64> = drift.iter().map(|d| d.max(1e-6)).collect();
        let ok = roots.len() == m && gaps.iter().zip(&allowance).all(|(g, a)| g <= a);
        rows.push(OracleRow {
            t: s.t.clone(),
            ode: s.x.clone(),
            roots,
            gaps,
            allowance,
            ok,
        });
    }
    Ok(OracleReport {
        disc,
        m,
        rows,
        trajectory: traj,
    })
}
