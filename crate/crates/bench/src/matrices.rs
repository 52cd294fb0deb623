use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use udg_core::brown_words::words_up_to;
use udg_core::matrix_lab::{
    empirical_word_trace, sample_haar_unitary, sample_rng, simulate_unitary_bm, WordTraceBatch,
};

use crate::mixed_word;

pub fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_haar_unitary");
    for dim in [32, 64, 128] {
        g.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, &dim| {
            let mut rng = sample_rng(7, 0);
            b.iter(|| sample_haar_unitary(black_box(dim), &mut rng))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("unitary_bm");
    g.sample_size(10);
    for dim in [32, 64] {
        g.bench_with_input(BenchmarkId::new("steps100", dim), &dim, |b, &dim| {
            let mut rng = sample_rng(7, 0);
            b.iter(|| simulate_unitary_bm(black_box(dim), 1.0, 100, &mut rng).unwrap())
        });
    }
    g.finish();
}

pub fn block_traces(c: &mut Criterion) {
    let mut rng = sample_rng(7, 1);
    let m = sample_haar_unitary(128, &mut rng);
    let w = mixed_word(4);
    c.bench_function("block_trace/single_len4_N64", |b| {
        b.iter(|| empirical_word_trace(black_box(&m), 2, &w).unwrap())
    });

    let words = words_up_to(2, 4);
    let batch = WordTraceBatch::new(2, &words).unwrap();
    let mut g = c.benchmark_group("block_trace_all_len4_N64");
    g.sample_size(10);
    g.bench_function("batch", |b| b.iter(|| batch.traces(black_box(&m)).unwrap()));
    g.bench_function("one_by_one", |b| {
        b.iter(|| {
            words
                .iter()
                .map(|w| empirical_word_trace(&m, 2, w).unwrap())
                .collect::<Vec<_>>()
        })
    });
    g.finish();
}
