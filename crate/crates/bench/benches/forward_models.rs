use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use onebit_core::arcsine::ry_reference;
use onebit_core::pade::{build_piecewise, h_s};
use onebit_core::quadrature::{f_s, j_s};
use onebit_core::{GLRule, LagParams, McNodes, PadeOptions};

fn forward(c: &mut Criterion) {
    let p = LagParams::new(1.1, 0.5).unwrap();
    let d = 0.3;
    let opts = PadeOptions::default();
    let rule = GLRule::new(13).unwrap();
    let nodes = McNodes::new(2000, 0).unwrap();

    let mut g = c.benchmark_group("forward");
    g.bench_function("pade_h_s", |b| b.iter(|| h_s(black_box(p), black_box(d), &opts).unwrap()));
    g.bench_function("pade_build", |b| b.iter(|| build_piecewise(black_box(p), black_box(d), &opts).unwrap()));
    g.bench_function("gauss_legendre_13", |b| b.iter(|| j_s(black_box(p), black_box(d), &rule).unwrap()));
    g.bench_function("monte_carlo_2000", |b| b.iter(|| f_s(black_box(p), black_box(d), &nodes).unwrap()));
    g.bench_function("adaptive_reference", |b| b.iter(|| ry_reference(black_box(p), black_box(d), 1e-10).unwrap()));
    g.finish();
}

criterion_group!(benches, forward);
criterion_main!(benches);
