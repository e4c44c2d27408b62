// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use doob_ap_bench::fixture;
use doob_ap_core::principal::principal_weighted_estimate;
use doob_ap_core::{
    ap_characteristic, ap_lower_test_family, build_decomposition, doob_maximal, extremal_search,
    verify_chain, weighted_maximal,
};

fn maximal(c: &mut Criterion) {
    let mut group = c.benchmark_group("maximal");
    for depth in [10, 14, 18] {
        let (space, f, v) = fixture(depth, 1);
        group.bench_with_input(BenchmarkId::new("doob", depth), &depth, |b, _| {
            b.iter(|| doob_maximal(black_box(&space), black_box(&f)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("weighted", depth), &depth, |b, _| {
            b.iter(|| weighted_maximal(black_box(&space), black_box(&f), black_box(&v)).unwrap())
        });
    }
    group.finish();
}

fn weights(c: &mut Criterion) {
    let mut group = c.benchmark_group("weights");
    for depth in [10, 14] {
        let (space, _, v) = fixture(depth, 2);
        group.bench_with_input(
            BenchmarkId::new("ap_characteristic", depth),
            &depth,
            |b, _| b.iter(|| ap_characteristic(black_box(&space), black_box(&v), 2.0).unwrap()),
        );
        group.bench_with_input(BenchmarkId::new("test_family", depth), &depth, |b, _| {
            b.iter(|| ap_lower_test_family(black_box(&space), black_box(&v), 2.0).unwrap())
        });
    }
    let (space, _, v) = fixture(10, 3);
    group.bench_function("extremal_search/10/500", |b| {
        b.iter(|| extremal_search(black_box(&space), black_box(&v), 2.0, 500, 0).unwrap())
    });
    group.finish();
}

fn decompositions(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompositions");
    group.sample_size(20);
    let (space, f, v) = fixture(8, 4);
    let g = f.abs();
    group.bench_function("stopping/8", |b| {
        b.iter(|| {
            let dec = build_decomposition(black_box(&space), &f, &v, 2.0, 1.2).unwrap();
            verify_chain(&dec, &space, &f, &v, 2.0).unwrap()
        })
    });
    group.bench_function("principal_estimate/8", |b| {
        b.iter(|| principal_weighted_estimate(black_box(&space), &g, &v, 2.0, 1.5).unwrap())
    });
    group.finish();
}

criterion_group!(benches, maximal, weights, decompositions);
criterion_main!(benches);
