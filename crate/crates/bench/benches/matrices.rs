use criterion::{criterion_group, criterion_main};

criterion_group!(
    benches,
    udg_bench::matrices::sampling,
    udg_bench::matrices::block_traces
);
criterion_main!(benches);
