use std::hint::black_box;
use std::sync::Arc;

use criterion::{BenchmarkId, Criterion};
use udg_core::brown_words::words_of_length;
use udg_core::convolutions::{convolve, ProductKind};
use udg_core::haar_traces::{eval_free_haar, eval_tensor_haar, eval_tensor_haar_oracle, FreeHaarTrace};
use udg_core::noncrossing::{enumerate_nc, kreweras_relative, NCPartition};
use udg_core::nonexistence::phi2;
use udg_core::StateEvaluator;

use crate::{alternating_word, mixed_word};

pub fn noncrossing(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate_nc");
    for m in [6, 8, 10] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| enumerate_nc(black_box(m)).unwrap())
        });
    }
    g.finish();

    let sigma = NCPartition::new(vec![1, 3, 5, 7], vec![vec![1, 5], vec![3], vec![7]]).unwrap();
    c.bench_function("kreweras_relative/8", |b| {
        b.iter(|| kreweras_relative(black_box(&sigma), &[2, 4, 6, 8]).unwrap())
    });
}

pub fn haar_traces(c: &mut Criterion) {
    let mut g = c.benchmark_group("free_haar");
    for k in [2, 4, 6] {
        let w = alternating_word(3, k);
        g.bench_with_input(BenchmarkId::from_parameter(2 * k), &w, |b, w| {
            b.iter(|| eval_free_haar(black_box(w)).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("tensor_haar");
    for len in [4, 8, 12] {
        let w = mixed_word(len);
        g.bench_with_input(BenchmarkId::new("closed_form", len), &w, |b, w| {
            b.iter(|| eval_tensor_haar(black_box(w)).unwrap())
        });
        if len <= 8 {
            g.bench_with_input(BenchmarkId::new("oracle", len), &w, |b, w| {
                b.iter(|| eval_tensor_haar_oracle(black_box(w)).unwrap())
            });
        }
    }
    g.finish();

    let words = words_of_length(2, 4);
    c.bench_function("tensor_haar/all_words_len4_n2", |b| {
        b.iter(|| {
            words
                .iter()
                .map(|w| eval_tensor_haar(w).unwrap())
                .sum::<udg_core::C64>()
        })
    });
}

pub fn convolutions(c: &mut Criterion) {
    let mut g = c.benchmark_group("convolve");
    let w = mixed_word(4);
    for kind in [
        ProductKind::Free,
        ProductKind::Tensor,
        ProductKind::Boolean,
        ProductKind::Monotone,
    ] {
        g.bench_function(kind.name(), |b| {
            b.iter(|| {
                // fresh state each time, so the product cache starts empty
                let conv = convolve(kind, Arc::new(phi2(2)), Arc::new(FreeHaarTrace::new(2))).unwrap();
                conv.eval(black_box(&w)).unwrap()
            })
        });
    }
    g.finish();
}
