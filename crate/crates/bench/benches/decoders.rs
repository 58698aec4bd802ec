use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spamtomo::decoder::{compute_all_z, decode_exact, estimate_batch, Sampler};
use spamtomo::eliminators::PlanCache;
use spamtomo::{enumerate_basis, run_randomized, BasisFamily, ExactOptions, RandomizedConfig, RngStream};
use spamtomo_bench::flip_device;

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact");
    for n in 1..=3 {
        let device = flip_device(n).unwrap();
        let plans = PlanCache::computational(n);
        group.bench_with_input(BenchmarkId::new("compute_all_z", n), &n, |b, _| {
            b.iter(|| compute_all_z(&device, &plans).unwrap())
        });
        let z = compute_all_z(&device, &plans).unwrap();
        let povm = device.povm().clone();
        group.bench_with_input(BenchmarkId::new("decode_exact", n), &n, |b, _| {
            b.iter(|| decode_exact(&z, &povm, &ExactOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn sampled(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampled");
    group.sample_size(20);
    let device = flip_device(2).unwrap();
    let sampler = Sampler::new(&device, 2).unwrap();
    let paulis = enumerate_basis(2, BasisFamily::TracelessPauli);
    for shots in [1u64 << 14, 1 << 18] {
        group.bench_with_input(BenchmarkId::new("estimate_batch", shots), &shots, |b, &shots| {
            b.iter(|| estimate_batch(&sampler, &paulis, shots, &RngStream::new(1, 1)).unwrap())
        });
    }
    let config = RandomizedConfig::new(2, 0.25, 0.56, 0.1, 0.1, 5);
    group.bench_function("run_randomized", |b| b.iter(|| run_randomized(&device, &config).unwrap()));
    group.finish();
}

criterion_group!(benches, exact, sampled);
criterion_main!(benches);
