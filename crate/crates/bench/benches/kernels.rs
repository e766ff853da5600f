use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use bsf_bench::{checked_spec, poly, ring};
use bsf_core::cartier::frobenius_root;
use bsf_core::testmodule::{jumping_numbers, tau, SearchConfig};
use bsf_core::weyl::identity_suite;
use bsf_core::{Ideal, PAdicRational, Prime};

fn polynomial_arithmetic(c: &mut Criterion) {
    let r = ring(7, &["x", "y", "z"]);
    let f = poly("x^2+3*y*z+z^3+x*y+1", &r);
    c.bench_function("poly/pow_20", |b| b.iter(|| black_box(&f).pow(20).unwrap()));
    let big = f.pow(30).unwrap();
    c.bench_function("poly/decompose_e2", |b| {
        b.iter(|| black_box(&big).decompose_over_pe(2))
    });
}

fn groebner(c: &mut Criterion) {
    let r = ring(5, &["x", "y", "z"]);
    let gens = vec![
        poly("x^2*y+z^3", &r),
        poly("x*y^2+z^2+1", &r),
        poly("x^3+y^3+z", &r),
    ];
    c.bench_function("groebner/three_cubics_p5", |b| {
        b.iter(|| {
            let ideal = Ideal::new(&r, gens.clone());
            ideal.groebner_basis().unwrap().len()
        })
    });
}

fn frobenius_roots(c: &mut Criterion) {
    let r = ring(3, &["x", "y"]);
    let j = Ideal::principal(poly("x^2+y^3", &r).pow(40).unwrap());
    c.bench_function("froot/cusp_pow40_e3", |b| {
        b.iter(|| frobenius_root(black_box(&j), 3))
    });
}

fn searches(c: &mut Criterion) {
    let r = ring(7, &["x", "y"]);
    let spec = checked_spec(&r);
    let cusp = poly("x^2+y^3", &r);
    let config = SearchConfig::default();
    let t = PAdicRational::new(41u32, 2, Prime::new(7).unwrap());
    c.bench_function("tau/cusp_p7", |b| {
        b.iter(|| tau(&spec, &cusp, &t, &config).unwrap())
    });
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("jumps/cusp_p7", |b| {
        b.iter(|| jumping_numbers(&spec, &cusp, &config).unwrap())
    });
    group.finish();
}

fn operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("weyl");
    group.sample_size(10);
    group.bench_function("identity_suite/p3_e2", |b| {
        b.iter(|| identity_suite(Prime::new(3).unwrap(), 2, 200).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    polynomial_arithmetic,
    groebner,
    frobenius_roots,
    searches,
    operators
);
criterion_main!(benches);
