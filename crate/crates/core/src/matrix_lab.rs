//! Random unitary matrices, their n×n block decomposition, and Monte Carlo
//! estimates of block word traces.
//!
//! Every sample draws from its own ChaCha8 stream (seed, sample index), and
//! results are reduced in sample order, so estimates do not depend on the
//! number of worker threads.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::brown_words::{Letter, Word};
use crate::error::{Error, Result};
use crate::haar_traces::CompressedUnitaryState;
use crate::linalg::{eigh, qr, ComplexMatrix, C64, ONE};

/// Generator for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian(rng: &mut impl Rng, sd: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * sd
}

/// Matrix of iid standard complex Gaussians (E|z|² = 1).
pub fn sample_ginibre(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let sd = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(dim, dim, |_, _| C64::new(gaussian(rng, sd), gaussian(rng, sd)))
}

/// Q·Diag(R_kk/|R_kk|) for a Ginibre matrix Z = QR. The phase fix makes R
/// have a positive diagonal, which pins the factorization and makes Q Haar
/// distributed.
pub fn sample_haar_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let z = sample_ginibre(dim, rng);
    let (mut q, r) = qr(&z);
    let phases: Vec<C64> = (0..dim)
        .map(|k| {
            let d = r[(k, k)];
            if d.norm() == 0.0 {
                ONE
            } else {
                d / d.norm()
            }
        })
        .collect();
    for i in 0..dim {
        for (j, x) in q.row_mut(i).iter_mut().enumerate() {
            *x *= phases[j];
        }
    }
    q
}

/// Hermitian, off-diagonal entries complex Gaussian with E|G_ab|² = 1/N,
/// diagonal real Gaussian with variance 1/N, so E[tr_N G²] = 1.
pub fn sample_gue(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim, dim);
    let nf = dim as f64;
    let sd_off = (0.5 / nf).sqrt();
    let sd_diag = (1.0 / nf).sqrt();
    for a in 0..dim {
        g[(a, a)] = C64::new(gaussian(rng, sd_diag), 0.0);
        for b in a + 1..dim {
            let z = C64::new(gaussian(rng, sd_off), gaussian(rng, sd_off));
            g[(a, b)] = z;
            g[(b, a)] = z.conj();
        }
    }
    g
}

/// Π_k exp(i√(t/steps)·G_k) with fresh GUE increments, each exponential
/// taken through an exact Hermitian eigendecomposition.
pub fn simulate_unitary_bm(dim: usize, t: f64, steps: usize, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Invalid(format!("time must be finite and ≥ 0, got {t}")));
    }
    if steps == 0 {
        return Err(Error::Invalid("steps must be ≥ 1".into()));
    }
    let mut u = ComplexMatrix::identity(dim);
    if t == 0.0 {
        return Ok(u);
    }
    let s = (t / steps as f64).sqrt();
    for _ in 0..steps {
        let g = sample_gue(dim, rng);
        let e = eigh(&g)?;
        let step = e.apply_fn(|l| C64::from_polar(1.0, s * l));
        u = u.matmul(&step);
    }
    Ok(u)
}

fn binomial(k: u64, r: u64) -> f64 {
    if r > k {
        return 0.0;
    }
    let r = r.min(k - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (k - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// τ(U_t^k) = e^{−kt/2} Σ_{i<k} (−t)^i/i! · k^{i−1} · C(k, i+1) for the free
/// unitary Brownian motion; 1 for k = 0.
pub fn bm_moment_exact(k: u64, t: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    let mut sum = 0.0;
    let mut pow = 1.0 / kf; // (−t)^i k^{i−1} / i!
    for i in 0..k {
        sum += pow * binomial(k, i + 1);
        pow *= -t * kf / (i + 1) as f64;
    }
    (-kf * t / 2.0).exp() * sum
}

/// d/dt of `bm_moment_exact(k, t)`.
pub fn bm_moment_derivative(k: u64, t: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let kf = k as f64;
    // derivative of the polynomial part: Σ_{i≥1} (−1)^i t^{i−1}/(i−1)! k^{i−1} C(k,i+1)
    let mut dsum = 0.0;
    let mut pow = -1.0; // (−1)^i (t k)^{i−1} / (i−1)! at i = 1
    for i in 1..k {
        dsum += pow * binomial(k, i + 1);
        pow *= -t * kf / i as f64;
    }
    (-kf * t / 2.0).exp() * dsum - kf / 2.0 * bm_moment_exact(k, t)
}

/// The block state of the free unitary Brownian motion at time t, i.e. the
/// N → ∞ limit of block word traces of `simulate_unitary_bm`.
pub fn free_bm_block_state(n: usize, t: f64) -> CompressedUnitaryState {
    CompressedUnitaryState::new(
        n,
        format!("free-bm(t={t})"),
        Arc::new(move |k| C64::new(bm_moment_exact(k, t), 0.0)),
    )
}

/// The (i, j) block, 1-based, of a matrix divided into n×n blocks.
pub fn block(m: &ComplexMatrix, n: usize, i: usize, j: usize) -> Result<ComplexMatrix> {
    check_divisible(m, n)?;
    if i == 0 || i > n || j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: i.max(j), n });
    }
    Ok(m.block(n, i - 1, j - 1))
}

fn check_divisible(m: &ComplexMatrix, n: usize) -> Result<()> {
    if n == 0 || !m.is_square() || m.rows() % n != 0 {
        return Err(Error::Shape(format!(
            "a {}×{} matrix cannot be cut into {n}×{n} blocks",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn letter_block(m: &ComplexMatrix, n: usize, l: Letter) -> ComplexMatrix {
    let b = m.block(n, l.row - 1, l.col - 1);
    if l.star {
        b.adjoint()
    } else {
        b
    }
}

/// tr_N of the product of blocks, u*_ij contributing the adjoint of block
/// (i, j).
pub fn empirical_word_trace(m: &ComplexMatrix, n: usize, w: &Word) -> Result<C64> {
    check_divisible(m, n)?;
    if w.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.dim(),
        });
    }
    let mut it = w.letters().iter();
    let Some(&first) = it.next() else {
        return Ok(ONE);
    };
    let mut acc = letter_block(m, n, first);
    for &l in it {
        acc = acc.matmul(&letter_block(m, n, l));
    }
    Ok(acc.normalized_trace())
}

fn letter_index(n: usize, l: Letter) -> usize {
    let base = (l.row - 1) * n + (l.col - 1);
    if l.star {
        n * n + base
    } else {
        base
    }
}

/// Σ_ij a_ij b_ij for row-major slices.
fn dot(a: &[C64], b: &[C64]) -> C64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re - x.im * y.im;
        im += x.re * y.im + x.im * y.re;
    }
    C64::new(re, im)
}

/// Smallest rotation of the letter indices, so that words in one cyclic
/// class share a trace computation.
fn cyclic_representative(idx: &[usize]) -> Vec<usize> {
    (0..idx.len().max(1))
        .map(|r| idx[r..].iter().chain(&idx[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// Traces of many short words on one matrix. Words of length ≤ 4 reuse the
/// products of letter pairs; longer words fall back to direct products.
pub struct WordTraceBatch {
    n: usize,
    words: Vec<Word>,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl WordTraceBatch {
    pub fn new(n: usize, words: &[Word]) -> Result<Self> {
        let mut class_index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut classes = Vec::new();
        let mut class_of = Vec::with_capacity(words.len());
        for w in words {
            if w.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: w.dim(),
                });
            }
            let idx: Vec<usize> = w.letters().iter().map(|&l| letter_index(n, l)).collect();
            let rep = if idx.is_empty() {
                idx
            } else {
                cyclic_representative(&idx)
            };
            let c = *class_index.entry(rep.clone()).or_insert_with(|| {
                classes.push(rep);
                classes.len() - 1
            });
            class_of.push(c);
        }
        Ok(Self {
            n,
            words: words.to_vec(),
            classes,
            class_of,
        })
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn traces(&self, m: &ComplexMatrix) -> Result<Vec<C64>> {
        check_divisible(m, self.n)?;
        let n = self.n;
        let nl = 2 * n * n;
        let big = m.rows() / n;
        let nf = big as f64;
        let mut blocks: Vec<ComplexMatrix> = Vec::with_capacity(nl);
        for star in [false, true] {
            for i in 1..=n {
                for j in 1..=n {
                    blocks.push(letter_block(m, n, Letter { row: i, col: j, star }));
                }
            }
        }
        // adjoint letter index: (B_a)† = B_{a*}
        let adj = |a: usize| if a < n * n { a + n * n } else { a - n * n };
        let needs_pairs = self.classes.iter().any(|c| c.len() >= 3 && c.len() <= 4);
        let mut pairs: Vec<Option<ComplexMatrix>> = vec![None; nl * nl];
        if needs_pairs {
            for a in 0..nl {
                for b in 0..nl {
                    let mirror = adj(b) * nl + adj(a);
                    if let Some(p) = &pairs[mirror] {
                        pairs[a * nl + b] = Some(p.adjoint());
                    } else {
                        pairs[a * nl + b] = Some(blocks[a].matmul(&blocks[b]));
                    }
                }
            }
        }
        let transposed: Vec<ComplexMatrix> = blocks.iter().map(|b| b.transpose()).collect();
        let pair_t: Vec<Option<ComplexMatrix>> = pairs.iter().map(|p| p.as_ref().map(|p| p.transpose())).collect();
        let pair = |a: usize, b: usize| pairs[a * nl + b].as_ref().expect("pair products computed");
        let class_values: Vec<C64> = self
            .classes
            .iter()
            .map(|c| match c.len() {
                0 => ONE,
                1 => blocks[c[0]].trace() / nf,
                2 => dot(blocks[c[0]].as_slice(), transposed[c[1]].as_slice()) / nf,
                3 => dot(pair(c[0], c[1]).as_slice(), transposed[c[2]].as_slice()) / nf,
                4 => {
                    let t = pair_t[c[2] * nl + c[3]].as_ref().expect("pair products computed");
                    dot(pair(c[0], c[1]).as_slice(), t.as_slice()) / nf
                }
                _ => {
                    let mut acc = blocks[c[0]].clone();
                    for &l in &c[1..] {
                        acc = acc.matmul(&blocks[l]);
                    }
                    acc.normalized_trace()
                }
            })
            .collect();
        Ok(self.class_of.iter().map(|&c| class_values[c]).collect())
    }
}

/// A law on the unitary group that can be sampled.
pub trait UnitarySource: Sync {
    fn sample(&self, dim: usize, rng: &mut ChaCha8Rng) -> Result<ComplexMatrix>;
    fn describe(&self) -> String;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Haar,
    Bm { t: f64, steps: usize },
}

impl UnitarySource for Source {
    fn sample(&self, dim: usize, rng: &mut ChaCha8Rng) -> Result<ComplexMatrix> {
        match *self {
            Source::Haar => Ok(sample_haar_unitary(dim, rng)),
            Source::Bm { t, steps } => simulate_unitary_bm(dim, t, steps, rng),
        }
    }
    fn describe(&self) -> String {
        match self {
            Source::Haar => "haar".into(),
            Source::Bm { t, steps } => format!("bm(t={t},steps={steps})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexValue {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexValue> for C64 {
    fn from(z: ComplexValue) -> Self {
        C64::new(z.re, z.im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MCReport {
    pub word: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub samples: usize,
    pub mean: ComplexValue,
    /// max of the standard errors of the real and imaginary parts
    pub stderr: f64,
    pub seed: u64,
}

impl MCReport {
    /// |mean − exact| / stderr; infinite when stderr is 0 and they differ.
    pub fn sigmas(&self, exact: C64) -> f64 {
        let d = (C64::from(self.mean) - exact).norm();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }

    pub fn within(&self, exact: C64, bands: f64) -> bool {
        (C64::from(self.mean) - exact).norm() <= bands * self.stderr
    }
}

/// Sum in a fixed binary tree, so the result depends only on the order of
/// the inputs.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        l if l <= 8 => xs.iter().sum(),
        l => pairwise_sum(&xs[..l / 2]) + pairwise_sum(&xs[l / 2..]),
    }
}

/// (mean, standard error) with the n − 1 variance denominator.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let s = xs.len();
    if s == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / s as f64;
    if s == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (s - 1) as f64;
    (mean, (var / s as f64).sqrt())
}

/// Report for per-sample values of one word.
pub fn summarize_values(word: String, n: usize, big_n: usize, seed: u64, values: &[C64]) -> MCReport {
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    let (mr, sr) = mean_stderr(&re);
    let (mi, si) = mean_stderr(&im);
    MCReport {
        word,
        n,
        big_n,
        samples: values.len(),
        mean: ComplexValue { re: mr, im: mi },
        stderr: sr.max(si),
        seed,
    }
}

/// Largest nN accepted by the Monte Carlo drivers.
pub const MC_DIM_LIMIT: usize = 512;

/// Per-sample values of `f` on independent draws, in sample order.
pub fn sample_map<T: Send>(
    source: &dyn UnitarySource,
    dim: usize,
    samples: usize,
    seed: u64,
    f: impl Fn(&ComplexMatrix) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    crate::error::check_capacity("matrix dimension", dim, MC_DIM_LIMIT)?;
    if samples == 0 {
        return Err(Error::Invalid("samples must be ≥ 1".into()));
    }
    (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = sample_rng(seed, s);
            let m = source.sample(dim, &mut rng)?;
            f(&m)
        })
        .collect()
}

/// One report per word, all words evaluated on the same samples.
pub fn mc_estimate_many(
    source: &dyn UnitarySource,
    words: &[Word],
    n: usize,
    big_n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<MCReport>> {
    if big_n == 0 {
        return Err(Error::Invalid("N must be ≥ 1".into()));
    }
    let batch = WordTraceBatch::new(n, words)?;
    let per_sample = sample_map(source, n * big_n, samples, seed, |m| batch.traces(m))?;
    Ok(words
        .iter()
        .enumerate()
        .map(|(w, word)| {
            let vals: Vec<C64> = per_sample.iter().map(|row| row[w]).collect();
            summarize_values(word.to_string(), n, big_n, seed, &vals)
        })
        .collect())
}

pub fn mc_estimate(
    source: &dyn UnitarySource,
    w: &Word,
    n: usize,
    big_n: usize,
    samples: usize,
    seed: u64,
) -> Result<MCReport> {
    Ok(mc_estimate_many(source, std::slice::from_ref(w), n, big_n, samples, seed)?.remove(0))
}

/// u^k on U⟨1⟩.
pub fn power_word(k: usize) -> Word {
    Word::new(1, vec![Letter::u(1, 1); k]).expect("n = 1 letters")
}
