//! Gauss–Legendre rules at arbitrary precision and composite panels.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::bigreal::{BigReal, Precision};

/// Nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<BigReal>,
    pub weights: Vec<BigReal>,
}

// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: &BigReal) -> (BigReal, BigReal) {
    let p = x.precision();
    let mut p0 = BigReal::one(p);
    let mut p1 = x.clone();
    for k in 2..=n {
        let k = k as i64;
        let p2 = (x * &p1 * (2 * k - 1) - &p0 * (k - 1)) / k;
        p0 = p1;
        p1 = p2;
    }
    let one = BigReal::one(p);
    let dp = (x * &p1 - &p0) * n as i64 / (x.square() - one);
    (p1, dp)
}

fn legendre_f64(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

fn build(n: usize, prec: Precision) -> GaussRule {
    assert!(n >= 2);
    let wp = prec.with_guard(5);
    let tol = wp.ulp() * 8i64;
    let half = n / 2;
    let mut pos_nodes = Vec::with_capacity(half);
    let mut pos_weights = Vec::with_capacity(half);
    for k in 1..=half {
        let mut xf = (std::f64::consts::PI * (k as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (pv, dv) = legendre_f64(n, xf);
            let dx = pv / dv;
            xf -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let mut x = BigReal::from_f64(xf, wp);
        loop {
            let (pv, d) = legendre(n, &x);
            let dx = &pv / &d;
            x -= &dx;
            if dx.abs() <= tol {
                break;
            }
        }
        let (_, dp) = legendre(n, &x);
        let one = BigReal::one(wp);
        let w = BigReal::from_i64(2, wp) / ((one - x.square()) * dp.square());
        pos_nodes.push(x.to_precision(prec));
        pos_weights.push(w.to_precision(prec));
    }
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (x, w) in pos_nodes.iter().zip(&pos_weights) {
        nodes.push(-x);
        weights.push(w.clone());
    }
    if n % 2 == 1 {
        nodes.push(BigReal::zero(prec));
        let (_, d) = legendre(n, &BigReal::zero(wp));
        weights.push((BigReal::from_i64(2, wp) / d.square()).to_precision(prec));
    }
    for (x, w) in pos_nodes.into_iter().zip(pos_weights).rev() {
        nodes.push(x);
        weights.push(w);
    }
    GaussRule { nodes, weights }
}

/// The `n`-point rule at precision `prec`, cached process-wide.
pub fn gauss_legendre(n: usize, prec: Precision) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&(n, prec.digits())) {
        return r.clone();
    }
    let rule = Arc::new(build(n, prec));
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .entry((n, prec.digits()))
        .or_insert(rule)
        .clone()
}

/// Nodes and weights of the composite rule with `panels` equal panels on
/// `[a, b]`, ordered by increasing node.
pub fn composite(
    a: &BigReal,
    b: &BigReal,
    panels: usize,
    rule: &GaussRule,
) -> Vec<(BigReal, BigReal)> {
    let width = (b - a) / panels as i64;
    let half = &width / 2i64;
    let mut out = Vec::with_capacity(panels * rule.nodes.len());
    for k in 0..panels {
        let mid = a + &(&width * k as i64) + &half;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((&mid + &(&half * x), &half * w));
        }
    }
    out
}
