use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use lowdisc::heatflow::derivative;
use lowdisc::theta::PhiEvaluator;
use lowdisc::xi::{XiEvaluator, XiOptions};
use lowdisc::BigReal;
use lowdisc_bench::{disc, precision, spread_state, DISCS};

fn phi(c: &mut Criterion) {
    let p = precision();
    let eps = BigReal::parse("5e-16", p).unwrap();
    let u = BigReal::ratio(1, 4, p);
    let mut g = c.benchmark_group("phi");
    for n in DISCS {
        let e = PhiEvaluator::new(disc(n).character(), &eps).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &e, |b, e| {
            b.iter(|| e.phi(black_box(&u)).unwrap())
        });
    }
    g.finish();
}

fn xi(c: &mut Criterion) {
    let p = precision();
    let x = BigReal::ratio(1, 2, p);
    let mut g = c.benchmark_group("xi");
    g.sample_size(10);
    for n in DISCS {
        let e = XiEvaluator::new(disc(n), &XiOptions::new(p).height(2.0)).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &e, |b, e| {
            b.iter(|| e.xi_t(black_box(&x)).unwrap())
        });
    }
    g.finish();
}

fn moments(c: &mut Criterion) {
    let p = precision();
    let mut g = c.benchmark_group("moments");
    g.sample_size(10);
    for n in DISCS {
        g.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| {
                XiEvaluator::new(disc(n), &XiOptions::new(p).height(0.0))
                    .and_then(|e| e.moments())
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn flow_derivative(c: &mut Criterion) {
    let mut g = c.benchmark_group("derivative");
    for m in [8, 32, 128] {
        let s = spread_state(m);
        g.bench_with_input(BenchmarkId::from_parameter(m), &s, |b, s| {
            b.iter(|| derivative(black_box(s)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, phi, xi, moments, flow_derivative);
criterion_main!(benches);
