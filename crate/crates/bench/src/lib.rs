//! Benchmarks for the hot kernels: the closed-form thresholds, the Bessel
//! functions behind the analytic outage curves, and Monte Carlo throughput.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, Throughput};
use relaykit::fading::{sample_gains, stream_rng};
use relaykit::flow::{b1, b2};
use relaykit::outage::{mc_outage, thm4_bound};
use relaykit::special::{bessel_k0, bessel_k1};
use relaykit::{McConfig, Protocol, RateNats, RateTag, Rnsnr};

pub fn thresholds(c: &mut Criterion) {
    let gains = sample_gains(&mut stream_rng(1, 0), 1024).unwrap();
    let mut group = c.benchmark_group("threshold");
    group.throughput(Throughput::Elements(gains.len() as u64));
    for bits in [0.01, 1.0, 6.0] {
        let k = RateNats::from_bits(bits).unwrap();
        group.bench_with_input(BenchmarkId::new("b1", bits), &k, |b, &k| {
            b.iter(|| gains.iter().map(|g| b1(g, k).bound.value()).sum::<f64>())
        });
        group.bench_with_input(BenchmarkId::new("b2", bits), &k, |b, &k| {
            b.iter(|| gains.iter().map(|g| b2(g, k).bound.value()).sum::<f64>())
        });
    }
    group.finish();
}

pub fn special(c: &mut Criterion) {
    let mut group = c.benchmark_group("bessel");
    for x in [1e-3, 1.5, 20.0, 2e3] {
        group.bench_with_input(BenchmarkId::new("k0", x), &x, |b, &x| {
            b.iter(|| bessel_k0(black_box(x)))
        });
        group.bench_with_input(BenchmarkId::new("k1", x), &x, |b, &x| {
            b.iter(|| bessel_k1(black_box(x)))
        });
    }
    group.finish();

    let s = Rnsnr::from_db(30.0).unwrap();
    let mut group = c.benchmark_group("outage_bound");
    for part in 1..=6u8 {
        group.bench_with_input(BenchmarkId::from_parameter(part), &part, |b, &p| {
            b.iter(|| thm4_bound(p, black_box(s)))
        });
    }
    group.finish();
}

pub fn monte_carlo(c: &mut Criterion) {
    let grid: Vec<f64> = (0..=8).map(|i| 10.0 + 2.5 * i as f64).collect();
    let cfg = McConfig::new(1 << 16, 7).with_workers(Some(1));
    let mut group = c.benchmark_group("mc_outage");
    group.sample_size(10);
    group.throughput(Throughput::Elements(cfg.samples));
    for (name, rate) in [
        ("zero", RateTag::ZeroLimit),
        ("3bits", RateTag::Finite(RateNats::from_bits(3.0).unwrap())),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| mc_outage(Protocol::Hdp1, rate, &grid, &cfg).unwrap())
        });
    }
    group.finish();
}
