use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kahan_bench::{beam_params, quartic_map};
use kahan_core::casebook::{beam_symmetric, quartic_oscillator, BeamCoefficients};
use kahan_core::darboux::find_darboux;
use kahan_core::{discretize, solve_forward};

fn build(c: &mut Criterion) {
    let quartic = quartic_oscillator(None).unwrap().system;
    let beam = beam_symmetric(&BeamCoefficients::symbolic()).unwrap().system;
    c.bench_function("discretize quartic", |b| b.iter(|| discretize(black_box(&quartic))));
    c.bench_function("discretize beam", |b| b.iter(|| discretize(black_box(&beam))));
    let scheme = discretize(&quartic).unwrap();
    c.bench_function("solve quartic", |b| b.iter(|| solve_forward(black_box(&scheme))));
    let coeffs = beam_params().coefficients();
    c.bench_function("solve bound beam", |b| b.iter(|| beam_symmetric(black_box(&coeffs))));
}

fn darboux(c: &mut Criterion) {
    let map = quartic_map();
    let mut g = c.benchmark_group("darboux");
    g.sample_size(10);
    g.bench_function("quartic maxdeg 4", |b| b.iter(|| find_darboux(black_box(&map), 4)));
    g.finish();
}

criterion_group!(benches, build, darboux);
criterion_main!(benches);
