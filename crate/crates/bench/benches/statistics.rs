use criterion::{criterion_group, criterion_main, Criterion};
use mdfield::limitlaw::{bessel_k0, cdf_limit, cf_product_normals};
use mdfield::stats::{ecf, ks_one_sample, ks_two_sample};
use mdfield::{CfGrid, LimitLaw};
use mdfield_bench::normal_sample;
use std::hint::black_box;

fn special_functions(c: &mut Criterion) {
    c.bench_function("bessel_k0", |b| {
        b.iter(|| (1..=100).map(|k| bessel_k0(black_box(k as f64 * 0.15)).unwrap()).sum::<f64>())
    });
    let bessel = LimitLaw::bessel();
    c.bench_function("bessel_cdf", |b| {
        b.iter(|| cdf_limit(&bessel, black_box(1.3)).unwrap())
    });
    c.bench_function("cf_product_normals_d3", |b| {
        b.iter(|| cf_product_normals(black_box(1.0), 3).unwrap())
    });
}

fn distances(c: &mut Criterion) {
    let a = normal_sample(20_000, 1);
    let b = normal_sample(20_000, 2);
    let normal = LimitLaw::standard_normal();
    c.bench_function("ks_one_sample_normal_20k", |bch| {
        bch.iter(|| ks_one_sample(black_box(&a), &normal).unwrap())
    });
    c.bench_function("ks_two_sample_20k", |bch| bch.iter(|| ks_two_sample(black_box(&a), &b)));
    let grid = CfGrid::linspace(0.0, 3.0, 13);
    c.bench_function("ecf_20k_13pt", |bch| bch.iter(|| ecf(black_box(&a), &grid)));
}

criterion_group!(benches, special_functions, distances);
criterion_main!(benches);
