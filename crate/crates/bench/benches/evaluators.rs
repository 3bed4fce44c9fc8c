use std::hint::black_box;

use brjuno_core::brjuno::{self, EvalConfig};
use brjuno_core::complex::{self, TruncationPlan};
use brjuno_core::delta;
use brjuno_core::dilog::li2;
use brjuno_core::oracle::{self, PeriodicCF};
use brjuno_core::real;
use brjuno_core::CfKind;
use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

fn real_series(c: &mut Criterion) {
    let cfg = EvalConfig::default();
    let x = real::ratio(1, 1) / std::f64::consts::PI;
    c.bench_function("brjuno", |b| b.iter(|| brjuno::brjuno(black_box(x), &cfg)));
    c.bench_function("wilton", |b| b.iter(|| brjuno::wilton(black_box(x), &cfg)));
    c.bench_function("semi_brjuno", |b| b.iter(|| brjuno::semi_brjuno(black_box(x), &cfg)));
    // Just below 1/3 the by-excess orbit enters a long run of 2s.
    let near = real::ratio(1, 3) - 1e-9;
    c.bench_function("semi_brjuno near 1/3", |b| b.iter(|| brjuno::semi_brjuno(black_box(near), &cfg)));
}

fn defects(c: &mut Criterion) {
    let cfg = EvalConfig::default();
    let x = real::silver();
    c.bench_function("delta_minus_direct", |b| b.iter(|| delta::delta_minus_direct(black_box(x), &cfg)));
    c.bench_function("delta_minus_series", |b| b.iter(|| delta::delta_minus_series(black_box(x), 40)));
    c.bench_function("jump_at 2/7", |b| b.iter(|| delta::jump_at(2, 7, &delta::DEFAULT_OFFSETS)));
}

fn complex_sums(c: &mut Criterion) {
    let z = Complex64::new(0.618, 0.01);
    c.bench_function("li2", |b| b.iter(|| li2(black_box(Complex64::new(0.3, 0.9)))));
    let plan = TruncationPlan::with_q_max(100);
    let mut g = c.benchmark_group("complex");
    g.sample_size(10);
    g.bench_function("complex_sums q_max 100", |b| b.iter(|| complex::complex_sums(black_box(z), &plan)));
    g.finish();
}

fn big_float(c: &mut Criterion) {
    let pc = PeriodicCF::pure(CfKind::Gauss, &[1, 2, 3]);
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("closed_form_b 256 bits", |b| b.iter(|| oracle::closed_form_b(&pc, brjuno::RealFn::Brjuno, 256)));
    g.finish();
}

criterion_group!(benches, real_series, defects, complex_sums, big_float);
criterion_main!(benches);
