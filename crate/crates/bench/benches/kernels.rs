use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cyclab::bergman::gram_distance_inner;
use cyclab::series::{inner_coeffs, multiply, multiply_fft, AtomicSingularMeasure};
use cyclab::weights::{make_family, FamilySpec};

fn series(c: &mut Criterion) {
    let nu = AtomicSingularMeasure::point_mass(1.0).unwrap();
    let mut g = c.benchmark_group("series");
    for m in [256usize, 1024, 4096] {
        g.bench_with_input(BenchmarkId::new("inner_coeffs", m), &m, |b, &m| {
            b.iter(|| inner_coeffs(black_box(&nu), m))
        });
        let u = inner_coeffs(&nu, m);
        g.bench_with_input(BenchmarkId::new("multiply", m), &m, |b, &m| {
            b.iter(|| multiply(black_box(&u), black_box(&u), m))
        });
        g.bench_with_input(BenchmarkId::new("multiply_fft", m), &m, |b, &m| {
            b.iter(|| multiply_fft(black_box(&u), black_box(&u), m))
        });
    }
    g.finish();
}

fn gram(c: &mut Criterion) {
    let nu = AtomicSingularMeasure::point_mass(1.0).unwrap();
    let spec = FamilySpec::Stretched { c: 1.0, beta: 0.5 };
    let w = make_family(&spec, 4097, false, None).unwrap();
    let u = inner_coeffs(&nu, 4096);
    let mut g = c.benchmark_group("gram");
    g.sample_size(10);
    for n in [16usize, 64, 128] {
        g.bench_with_input(BenchmarkId::new("distance", n), &n, |b, &n| {
            b.iter(|| gram_distance_inner(&w, black_box(&u), n, 4096).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, series, gram);
criterion_main!(benches);
