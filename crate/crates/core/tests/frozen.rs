//! Values computed once by the independent oracles (cumulant sums for the
//! free trace, the level-set oracle for the tensor trace) and pinned here.

use udg_core::brown_words::Word;
use udg_core::haar_traces::{eval_free_haar, eval_tensor_haar, eval_tensor_haar_oracle};
use udg_core::matrix_lab::{bm_moment_derivative, bm_moment_exact};

const TOL: f64 = 1e-12;

// (word, free(n), tensor(n)) as functions of n
type Row = (&'static str, fn(f64) -> f64, fn(f64) -> f64);

const TABLE: &[Row] = &[
    ("", |_| 1.0, |_| 1.0),
    ("u11 u11*", |n| 1.0 / n, |n| 1.0 / n),
    ("u11 u11* u11 u11*", |n| 2.0 / (n * n) - 1.0 / (n * n * n), |n| 1.0 / n),
    ("u11 u11 u11* u11*", |n| 1.0 / (n * n), |n| 1.0 / (n * n)),
    ("u12 u12* u21 u21*", |n| 1.0 / (n * n), |_| 0.0),
    ("u11 u12* u22 u21*", |_| 0.0, |n| 1.0 / n),
    ("u12 u21* u12 u21*", |_| 0.0, |_| 0.0),
    ("u11 u21* u12 u22*", |_| 0.0, |_| 0.0),
    (
        "u11* u11 u11* u11 u11* u11",
        |n| 5.0 / n.powi(3) - 6.0 / n.powi(4) + 2.0 / n.powi(5),
        |n| 1.0 / n,
    ),
];

#[test]
fn haar_trace_table() {
    for n in 2..=3 {
        let nf = n as f64;
        for (text, free, tensor) in TABLE {
            let w = Word::parse(n, text).unwrap();
            let f = eval_free_haar(&w).unwrap();
            let t = eval_tensor_haar(&w).unwrap();
            let o = eval_tensor_haar_oracle(&w).unwrap();
            assert!(
                (f.re - free(nf)).abs() < TOL && f.im.abs() < TOL,
                "free n={n} {text}: {f}"
            );
            assert!(
                (t.re - tensor(nf)).abs() < TOL && t.im.abs() < TOL,
                "tensor n={n} {text}: {t}"
            );
            assert!((t - o).norm() < TOL, "tensor oracle n={n} {text}");
        }
    }
}

#[test]
fn n1_powers_vanish() {
    for k in 1..=8 {
        let text = vec!["u11"; k].join(" ");
        assert_eq!(eval_free_haar(&Word::parse(1, &text).unwrap()).unwrap().norm(), 0.0);
    }
}

#[test]
fn brownian_moment_values() {
    // k = 1: e^{-t/2}; k = 2: e^{-t}(1 - t)
    for t in [0.0, 0.5, 1.0, 3.0] {
        assert!((bm_moment_exact(1, t) - (-t / 2.0f64).exp()).abs() < TOL);
        assert!((bm_moment_exact(2, t) - (-t).exp() * (1.0 - t)).abs() < TOL);
    }
    for k in 1..=6u64 {
        let kf = k as f64;
        assert!((bm_moment_derivative(k, 0.0) - (-kf * kf / 2.0)).abs() < TOL);
    }
}
