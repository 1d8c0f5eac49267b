use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ladderlab::dgha::parse_f;
use ladderlab::ladder::{build_families, classify};
use ladderlab::space::eig_matrix;
use ladderlab::C64;
use ladderlab_bench::{dgha_triple, quon_triple, TOL};

const DIMS: [usize; 3] = [16, 32, 64];

fn eig(c: &mut Criterion) {
    let mut g = c.benchmark_group("eig_matrix");
    for dim in DIMS {
        let (t, _) = quon_triple(C64::new(0.3, 0.8), dim);
        let h = t.h.coords();
        g.bench_with_input(BenchmarkId::from_parameter(dim), &h, |b, h| b.iter(|| eig_matrix(black_box(h))));
    }
    g.finish();
}

fn families(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_families");
    for dim in DIMS {
        let (t, space) = quon_triple(C64::new(0.5, 0.0), dim);
        let seed = space.phi_basis(0);
        g.bench_with_input(BenchmarkId::new("quon", dim), &dim, |b, _| {
            b.iter(|| build_families(black_box(&t), &seed, space.window(), TOL))
        });
        let (t, space) = dgha_triple("x + 3", dim);
        let seed = space.phi_basis(0);
        g.bench_with_input(BenchmarkId::new("dgha", dim), &dim, |b, _| {
            b.iter(|| build_families(black_box(&t), &seed, space.window(), TOL))
        });
    }
    g.finish();
}

fn classification(c: &mut Criterion) {
    let mut g = c.benchmark_group("classify");
    for dim in DIMS {
        let (t, _) = quon_triple(C64::new(0.7, 0.1), dim);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &t, |b, t| b.iter(|| classify(black_box(t), TOL)));
    }
    g.finish();
}

fn parse(c: &mut Criterion) {
    c.bench_function("parse_f", |b| b.iter(|| parse_f(black_box("2*x^2 + tanh(x/3) - exp(-x) + 1"))));
}

criterion_group!(benches, eig, families, classification, parse);
criterion_main!(benches);
