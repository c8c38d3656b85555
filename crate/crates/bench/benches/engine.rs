// SPDX-License-Identifier: Apache-2.0

use chiralwalk_bench::{dimerized, domain_wall};
use chiralwalk_core::oracle::circulant_spectrum;
use chiralwalk_core::{build_eigenstate, fredholm_index, SamplingOptions, Side, Sign};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn winding(c: &mut Criterion) {
    let mut group = c.benchmark_group("index_winding");
    for period in [1, 2, 4] {
        let m = dimerized(period);
        let f1 = m.half_step_blocks().f1_plus;
        let opts = SamplingOptions::default();
        group.bench_with_input(BenchmarkId::from_parameter(period), &f1, |b, op| b.iter(|| fredholm_index(black_box(op), &opts).unwrap()));
    }
    group.finish();
}

fn index_pm(c: &mut Criterion) {
    let m = dimerized(2);
    let opts = SamplingOptions::default();
    c.bench_function("index_pm", |b| b.iter(|| black_box(&m).index_pm(&opts).unwrap()));
}

fn spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("essential_spectrum_u");
    group.sample_size(20);
    for samples in [256, 1024, 4096] {
        let m = dimerized(2);
        let opts = SamplingOptions::with_samples(samples);
        group.bench_with_input(BenchmarkId::from_parameter(samples), &opts, |b, opts| {
            b.iter(|| m.essential_spectrum_u(black_box(opts)).unwrap())
        });
    }
    group.finish();
}

fn eigenstate(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigenstate");
    let m = domain_wall();
    for w in [128i64, 1024] {
        group.bench_with_input(BenchmarkId::from_parameter(w), &w, |b, &w| b.iter(|| build_eigenstate(&m, Sign::Plus, (-w, w)).unwrap()));
    }
    group.finish();
}

fn ring_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("circulant_spectrum");
    group.sample_size(10);
    let u = dimerized(2).evolution_operator().periodic_part(Side::Left);
    for cells in [16, 32] {
        group.bench_with_input(BenchmarkId::from_parameter(cells), &cells, |b, &cells| {
            b.iter(|| circulant_spectrum(black_box(&u), Side::Left, cells).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, winding, index_pm, spectrum, eigenstate, ring_oracle);
criterion_main!(benches);
