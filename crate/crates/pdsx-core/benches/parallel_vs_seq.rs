//! Compares the data-parallel enumeration kernels against their
//! sequential twins. With the default `parallel` feature the two paths
//! differ by rayon; with `--no-default-features` both are sequential and
//! the comparison collapses, which is the expected control.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pdsx_core::ck::{all_matrices, ck_relation_polys, condition_i_many, condition_i_many_seq, CkMatrix};
use pdsx_core::group::FiniteGroup;
use pdsx_core::spectrum::{
    enumerate_spectrum_ball, enumerate_spectrum_ball_seq, finite_group_spectrum,
    finite_group_spectrum_seq, RelationPoly,
};
use pdsx_core::Limits;

fn bench_spectrum_enumeration(c: &mut Criterion) {
    let a = CkMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
    let polys = ck_relation_polys(&a, 2);
    let limits = Limits::default();
    let mut group = c.benchmark_group("spectrum_ball_rank2_radius2_ck");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let out = enumerate_spectrum_ball(2, 2, black_box(&polys), &limits).unwrap();
            black_box(out.len())
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let out = enumerate_spectrum_ball_seq(2, 2, black_box(&polys), &limits).unwrap();
            black_box(out.len())
        })
    });
    group.finish();
}

fn bench_condition_i_scan(c: &mut Criterion) {
    let mut universe = all_matrices(3);
    universe.extend(all_matrices(2));
    let mut group = c.benchmark_group("condition_i_all_3x3");
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(condition_i_many(black_box(&universe)).len()))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(condition_i_many_seq(black_box(&universe)).len()))
    });
    group.finish();
}

fn bench_finite_group_spectrum(c: &mut Criterion) {
    let z16 = FiniteGroup::cyclic(16);
    // force the generator into every pattern: 1_g − 1
    let polys = vec![RelationPoly::indicator(1usize).minus(RelationPoly::constant(1))];
    let limits = Limits::default();
    let mut group = c.benchmark_group("finite_group_spectrum_z16");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let out = finite_group_spectrum(&z16, black_box(&polys), &limits).unwrap();
            black_box(out.len())
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let out = finite_group_spectrum_seq(&z16, black_box(&polys), &limits).unwrap();
            black_box(out.len())
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_spectrum_enumeration,
    bench_condition_i_scan,
    bench_finite_group_spectrum
);
criterion_main!(benches);
