use criterion::{criterion_group, criterion_main};

criterion_group!(
    benches,
    relaykit_bench::thresholds,
    relaykit_bench::special,
    relaykit_bench::monte_carlo
);
criterion_main!(benches);
