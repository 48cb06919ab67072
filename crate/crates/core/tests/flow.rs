use lowdisc::heatflow::{
    default_fd_scale, diagnostics, integrate, oracle_check, FlowOptions, FlowState, OracleConfig,
};
use lowdisc::zeros::{find_zeros, ZeroOptions, ZeroTarget};
use lowdisc::{BigReal, FundamentalDiscriminant, Precision};

fn p30() -> Precision {
    Precision::new(30).unwrap()
}

fn seeds(n: i64, m: usize) -> FlowState {
    let d = FundamentalDiscriminant::new(n).unwrap();
    let zl = find_zeros(d, &ZeroOptions::new(p30(), ZeroTarget::Count(m))).unwrap();
    FlowState::new(BigReal::zero(p30()), zl.gammas).unwrap()
}

#[test]
fn flow_tracks_quadrature_roots_for_163() {
    let q = p30();
    let times = [BigReal::ratio(1, 10, q), BigReal::ratio(1, 4, q)];
    let d = FundamentalDiscriminant::new(-163).unwrap();
    let r = oracle_check(d, 32, &times, &OracleConfig::new(q)).unwrap();
    assert_eq!(r.rows.len(), 2);
    for row in &r.rows {
        assert!(row.ok, "t = {}: {:?}", row.t, row.gaps);
        assert!(row.ode.windows(2).all(|w| w[0] < w[1]));
    }
    // The first zero is the best resolved one: within a few parts in 10³.
    assert!(r.rows[0].gaps[0] < 1e-2);
}

#[test]
fn mirror_pair_separates_for_115147() {
    let q = p30();
    let s0 = seeds(-115147, 8);
    let mut o = FlowOptions::new(BigReal::parse("1e-14", q).unwrap());
    o.samples = (0..=20).map(|k| BigReal::ratio(k, 20, q)).collect();
    let tr = integrate(&s0, &BigReal::one(q), &o).unwrap();
    assert!(tr.collision.is_none());
    assert_eq!(tr.samples.len(), 21);
    for w in tr.samples.windows(2) {
        assert!(w[1].x[0] > w[0].x[0]);
        assert!(w[1].x.windows(2).all(|q| q[0] < q[1]));
    }
    // From 0.0032 to order one.
    assert!(tr.final_state.x[0].to_f64() > 0.5);
}

#[test]
fn decay_inequality_along_163_trajectory() {
    let q = p30();
    let s0 = seeds(-163, 32);
    let tol = BigReal::parse("1e-14", q).unwrap();
    let mut o = FlowOptions::new(tol.clone());
    o.samples = (0..20).map(|k| BigReal::ratio(k, 38, q)).collect();
    let tr = integrate(&s0, &BigReal::ratio(1, 2, q), &o).unwrap();
    assert_eq!(tr.samples.len(), 20);
    for s in &tr.samples {
        let d = diagnostics(s, &default_fd_scale(s, &tol), &tol).unwrap();
        assert!(d.decay_bound_ok, "t = {}", s.t);
        assert!(d.f.is_sign_positive() && d.f < d.g);
        if (&d.f * &s.x[0].square()).to_f64() <= 1.0 {
            assert!(d.g_prime_fd.is_finite());
        }
    }
}

#[test]
fn halving_tol_halves_integration_error() {
    let q = p30();
    let s0 = seeds(-163, 16);
    let end = BigReal::ratio(1, 10, q);
    let err = |tol: f64| {
        let o = FlowOptions::new(BigReal::from_f64(tol, q));
        integrate(&s0, &end, &o).unwrap().final_state.x
    };
    let reference = err(1e-20);
    let gap = |tol: f64| {
        err(tol)
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs().to_f64())
            .fold(0.0, f64::max)
    };
    let (a, b) = (gap(1e-14), gap(5e-15));
    assert!(b <= 0.5 * a, "{a:e} -> {b:e}");
    let (c, d) = (gap(1e-8), gap(1e-8 / 1024.0));
    assert!(d <= c / 1024.0, "{c:e} -> {d:e}");
}
