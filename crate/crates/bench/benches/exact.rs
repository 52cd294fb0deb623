use criterion::{criterion_group, criterion_main};

criterion_group!(
    benches,
    udg_bench::exact::noncrossing,
    udg_bench::exact::haar_traces,
    udg_bench::exact::convolutions
);
criterion_main!(benches);
