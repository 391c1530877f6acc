use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
#[cfg(feature = "parallel")]
use gcp_core::parallel::replicate_parallel;
use gcp_core::parallel::replicate_sequential;
use gcp_core::simulate::sample_path;
use gcp_core::{RateVector, SeedSpec};

fn replications(c: &mut Criterion) {
    let rates = RateVector::new(vec![1.0, 2.0, 0.5]).unwrap();
    let mut group = c.benchmark_group("sample_paths");
    group.sample_size(10);
    for count in [1_000usize, 10_000] {
        let draw = |i: u64| sample_path(&rates, 5.0, SeedSpec::new(42, i)).unwrap().total();
        group.bench_with_input(BenchmarkId::new("sequential", count), &count, |b, &n| {
            b.iter(|| replicate_sequential(n, draw))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", count), &count, |b, &n| {
            b.iter(|| replicate_parallel(n, draw))
        });
    }
    group.finish();
}

criterion_group!(benches, replications);
criterion_main!(benches);
