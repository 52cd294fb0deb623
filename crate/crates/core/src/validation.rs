//! The acceptance checks, runnable from tests and from the command line.
//!
//! Each check returns a [`CriterionResult`]; its `metrics` hold the numbers
//! behind the verdict. Randomized checks also keep the full JSON of their
//! estimates in `artifact`, which the determinism check compares byte for
//! byte across thread counts.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::brown_words::{all_unitarity_relations, alphabet, antipode, words_up_to, Letter, Word};
use crate::convolutions::{convolve, ProductKind};
use crate::error::Result;
use crate::haar_traces::{
    eval_free_haar, tensor_haar_letters, tensor_haar_oracle_letters, FreeHaarTrace, TensorHaarTrace,
};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::matrix_lab::{
    bm_moment_derivative, bm_moment_exact, empirical_word_trace, mc_estimate_many, mean_stderr, power_word,
    sample_haar_unitary, sample_map, sample_rng, MCReport, Source,
};
use crate::noncrossing::{
    all_set_partitions, enumerate_nc, enumerate_nc_on, kreweras_is_maximal_among, kreweras_relative,
};
use crate::nonexistence::{
    boolean_counterexample, build_woronowicz_state, check_boolean_identity, check_free_obstruction,
    check_monotone_identity, monotone_counterexample, phi1, phi2,
};
use crate::schurmann::{
    block_lift, bm_triple, conditional_positivity_min_eig, free_bm_block_slope, triple_from_whr, verify_triple_axioms,
    TripleDataWhR,
};
use crate::states::{gram_psd_check, is_tracial, moment_matrices, CharacterState, SharedState, StateEvaluator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

/// Deliberate defects for negative controls.
#[derive(Clone, Copy, Debug, Default)]
pub struct Faults {
    /// Perturbs one entry of the reference Catalan table.
    pub corrupt_catalan: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct Config {
    pub level: Level,
    pub seed: u64,
    pub faults: Faults,
}

impl Config {
    pub fn new(level: Level, seed: u64) -> Self {
        Self {
            level,
            seed,
            faults: Faults::default(),
        }
    }

    fn full(&self) -> bool {
        self.level == Level::Full
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub metrics: Value,
    #[serde(skip)]
    pub artifact: Option<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    /// `PASS  3 algebraic identities: ... (1.2 s)`
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {}: {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary,
            self.elapsed.as_secs_f64()
        )
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "combinatorial core"),
    (2, "haar trace exactness"),
    (3, "algebraic identities"),
    (4, "absorption"),
    (5, "n=1 haar property"),
    (6, "nonexistence witnesses"),
    (7, "random matrix limit"),
    (8, "brownian motion"),
    (9, "schurmann calculus"),
    (10, "determinism"),
];

/// Every threshold the checks compare against.
pub mod tol {
    pub const HAAR_EXACT: f64 = 1e-12;
    pub const ALGEBRA: f64 = 1e-8;
    pub const ABSORPTION: f64 = 1e-9;
    pub const UNIT_RESIDUAL: f64 = 1e-12;
    /// Width of Monte Carlo bands, in standard errors.
    pub const SIGMA_BAND: f64 = 4.0;
    pub const MC_STDERR_MAX: f64 = 0.02;
    pub const UNITARITY: f64 = 1e-8;
    pub const AXIOM: f64 = 1e-9;
    pub const GRID_UNITARITY: f64 = 1e-10;
    pub const DERIVATIVE: f64 = 1e-10;
    pub const CONDITIONAL_POSITIVITY: f64 = 1e-8;
    pub const LIFTED_SLOPE: f64 = 1e-5;
    /// Multiplied by dt: allowance for the O(dt) bias of block slopes.
    pub const BLOCK_SLOPE_BIAS: f64 = 16.0;

    pub const fn all() -> [(&'static str, f64); 13] {
        [
            ("haar_exact", HAAR_EXACT),
            ("algebra", ALGEBRA),
            ("absorption", ABSORPTION),
            ("unit_residual", UNIT_RESIDUAL),
            ("sigma_band", SIGMA_BAND),
            ("mc_stderr_max", MC_STDERR_MAX),
            ("unitarity", UNITARITY),
            ("axiom", AXIOM),
            ("grid_unitarity", GRID_UNITARITY),
            ("derivative", DERIVATIVE),
            ("conditional_positivity", CONDITIONAL_POSITIVITY),
            ("lifted_slope", LIFTED_SLOPE),
            ("block_slope_bias", BLOCK_SLOPE_BIAS),
        ]
    }
}

/// Criteria whose computations draw random numbers.
pub const RANDOMIZED: [u8; 4] = [4, 7, 8, 9];

struct Outcome {
    pass: bool,
    summary: String,
    metrics: Value,
    artifact: Option<String>,
}

fn outcome(pass: bool, summary: String, metrics: Value) -> Outcome {
    Outcome {
        pass,
        summary,
        metrics,
        artifact: None,
    }
}

pub fn run_criterion(id: u8, cfg: &Config) -> Result<CriterionResult> {
    let start = Instant::now();
    let out = match id {
        1 => combinatorial_core(cfg)?,
        2 => haar_exactness(cfg)?,
        3 => algebraic_identities(cfg)?,
        4 => absorption(cfg)?,
        5 => n1_haar_property(cfg)?,
        6 => nonexistence_witnesses(cfg)?,
        7 => random_matrix_limit(cfg)?,
        8 => brownian_motion(cfg)?,
        9 => schurmann_calculus(cfg)?,
        10 => determinism(cfg, &BTreeMap::new())?,
        _ => return Err(crate::Error::Invalid(format!("no criterion {id}"))),
    };
    Ok(finish(id, out, start))
}

fn finish(id: u8, out: Outcome, start: Instant) -> CriterionResult {
    CriterionResult {
        id,
        name: CRITERIA[(id - 1) as usize].1.to_string(),
        pass: out.pass,
        summary: out.summary,
        metrics: out.metrics,
        artifact: out.artifact,
        elapsed: start.elapsed(),
    }
}

/// Runs all ten criteria in order, calling `report` after each. The
/// determinism check reuses the artifacts of the earlier randomized runs.
pub fn run_all(cfg: &Config, mut report: impl FnMut(&CriterionResult)) -> Result<Vec<CriterionResult>> {
    let mut results = Vec::with_capacity(10);
    let mut artifacts = BTreeMap::new();
    for id in 1..=9u8 {
        let r = run_criterion(id, cfg)?;
        if let Some(a) = &r.artifact {
            artifacts.insert(id, a.clone());
        }
        report(&r);
        results.push(r);
    }
    let start = Instant::now();
    let r = finish(10, determinism(cfg, &artifacts)?, start);
    report(&r);
    results.push(r);
    Ok(results)
}

const CATALAN: [u64; 11] = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796];

fn combinatorial_core(cfg: &Config) -> Result<Outcome> {
    let mut table = CATALAN;
    if cfg.faults.corrupt_catalan {
        table[7] += 1;
    }
    let mut counts = Vec::new();
    let mut counts_ok = true;
    for (m, &expected) in table.iter().enumerate() {
        let got = enumerate_nc(m)?.len() as u64;
        counts_ok &= got == expected;
        counts.push(got);
    }
    let max_ground = if cfg.full() { 8 } else { 6 };
    let mut checked = 0usize;
    let mut failures = 0usize;
    for total in 1..=max_ground {
        let ground: Vec<usize> = (1..=total).collect();
        for mask in 0u32..(1 << total) {
            let e: Vec<usize> = ground.iter().copied().filter(|&x| mask & (1 << (x - 1)) != 0).collect();
            let f: Vec<usize> = ground.iter().copied().filter(|&x| mask & (1 << (x - 1)) == 0).collect();
            if f.is_empty() {
                continue;
            }
            let candidates = all_set_partitions(&f);
            for sigma in enumerate_nc_on(&e)? {
                let mu = kreweras_relative(&sigma, &f)?;
                if !kreweras_is_maximal_among(&sigma, &mu, &candidates) {
                    failures += 1;
                }
                checked += 1;
            }
        }
    }
    let pass = counts_ok && failures == 0;
    Ok(outcome(
        pass,
        format!(
            "|NC(m)| vs Catalan for m ≤ 10 {}; {checked} relative complements on grounds ≤ {max_ground}, {failures} not maximal",
            if counts_ok { "agree" } else { "DISAGREE" }
        ),
        json!({"nc_counts": counts, "reference": table, "kreweras_checked": checked, "kreweras_failures": failures, "max_ground": max_ground}),
    ))
}

/// Calls `f` on every letter sequence of length ≤ max_len over the
/// alphabet of U⟨n⟩, reusing one buffer.
fn for_each_letters(n: usize, max_len: usize, mut f: impl FnMut(&[Letter]) -> Result<()>) -> Result<usize> {
    let alpha = alphabet(n);
    let k = alpha.len();
    let mut count = 0;
    for len in 0..=max_len {
        let mut idx = vec![0usize; len];
        let mut buf: Vec<Letter> = vec![alpha[0]; len];
        loop {
            for (b, &i) in buf.iter_mut().zip(&idx) {
                *b = alpha[i];
            }
            f(&buf)?;
            count += 1;
            let mut carry = true;
            for p in (0..len).rev() {
                idx[p] += 1;
                if idx[p] < k {
                    carry = false;
                    break;
                }
                idx[p] = 0;
            }
            if carry {
                break;
            }
        }
    }
    Ok(count)
}

fn haar_exactness(cfg: &Config) -> Result<Outcome> {
    let mut free_dev: f64 = 0.0;
    for n in 1..=3usize {
        let nf = n as f64;
        let w2 = Word::parse(n, "u11 u11*")?;
        let w4 = Word::parse(n, "u11 u11* u11 u11*")?;
        free_dev = free_dev.max((eval_free_haar(&w2)? - 1.0 / nf).norm());
        free_dev = free_dev.max((eval_free_haar(&w4)? - (2.0 / (nf * nf) - 1.0 / (nf * nf * nf))).norm());
    }
    let max_len = if cfg.full() { 6 } else { 5 };
    let mut tensor_dev: f64 = 0.0;
    let mut worst = String::new();
    let mut words = 0;
    for n in 1..=3usize {
        words += for_each_letters(n, max_len, |letters| {
            let d = (tensor_haar_letters(n, letters)? - tensor_haar_oracle_letters(n, letters)?).norm();
            if d > tensor_dev {
                tensor_dev = d;
                worst = Word::new(n, letters.to_vec())?.to_string();
            }
            Ok(())
        })?;
    }
    let pass = free_dev <= tol::HAAR_EXACT && tensor_dev <= tol::HAAR_EXACT;
    Ok(outcome(
        pass,
        format!("free closed forms off by {free_dev:.1e}; tensor vs oracle max gap {tensor_dev:.1e} over {words} words (len ≤ {max_len}, n ≤ 3)"),
        json!({"free_max_dev": free_dev, "tensor_max_dev": tensor_dev, "tensor_words": words, "worst": worst, "tol": tol::HAAR_EXACT}),
    ))
}

fn algebraic_identities(cfg: &Config) -> Result<Outcome> {
    const TOL: f64 = tol::ALGEBRA;
    let max_n = if cfg.full() { 3 } else { 2 };
    let mut rows = Vec::new();
    let mut pass = true;
    for n in 1..=max_n {
        let states: [SharedState; 2] = [Arc::new(FreeHaarTrace::new(n)), Arc::new(TensorHaarTrace::new(n))];
        for s in states {
            // h(a · rel · b) for |a| + |b| ≤ 2
            let short = words_up_to(n, 2);
            let mut relation_max: f64 = 0.0;
            for rel in all_unitarity_relations(n) {
                for a in &short {
                    for b in &short {
                        if a.len() + b.len() > 2 {
                            continue;
                        }
                        let v = rel.eval_with(|w| s.eval(&a.concat(w)?.concat(b)?))?;
                        relation_max = relation_max.max(v.norm());
                    }
                }
            }
            let trace = is_tracial(s.as_ref(), 4, TOL)?;
            let mut antipode_max: f64 = 0.0;
            for w in words_up_to(n, 4) {
                antipode_max = antipode_max.max((s.eval(&antipode(&w))? - s.eval(&w)?).norm());
            }
            let gram = gram_psd_check(s.as_ref(), &words_up_to(n, 2), TOL)?;
            let ok = relation_max <= TOL && trace.tracial && antipode_max <= TOL && gram.positive;
            pass &= ok;
            rows.push(json!({
                "state": s.label(), "n": n, "relations": relation_max, "tracial_defect": trace.max_defect,
                "antipode": antipode_max, "gram_min_eig": gram.min_eigenvalue, "gram_size": gram.size, "pass": ok,
            }));
        }
    }
    let worst = |key: &str| {
        rows.iter()
            .map(|r| r[key].as_f64().unwrap_or(f64::NAN).abs())
            .fold(0.0, f64::max)
    };
    let min_eig = rows
        .iter()
        .map(|r| r["gram_min_eig"].as_f64().unwrap_or(f64::NAN))
        .fold(f64::INFINITY, f64::min);
    Ok(outcome(
        pass,
        format!(
            "n ≤ {max_n}, both traces: relations {:.1e}, traciality {:.1e}, h∘Σ−h {:.1e}, Gram min eig {:.2e}",
            worst("relations"),
            worst("tracial_defect"),
            worst("antipode"),
            min_eig
        ),
        json!({"rows": rows, "tol": TOL}),
    ))
}

/// Seeded Haar characters followed by φ1 and φ2.
fn character_family(n: usize, count: usize, seed: u64) -> Result<Vec<SharedState>> {
    let mut out: Vec<SharedState> = Vec::new();
    for i in 0..count {
        let v = sample_haar_unitary(n, &mut sample_rng(seed, i as u64));
        out.push(Arc::new(CharacterState::new(v)?));
    }
    out.push(Arc::new(phi1(n)));
    out.push(Arc::new(phi2(n)));
    Ok(out)
}

fn absorption(cfg: &Config) -> Result<Outcome> {
    const TOL: f64 = tol::ABSORPTION;
    let n = 2;
    let (count, max_len) = if cfg.full() { (5, 4) } else { (2, 3) };
    let words = words_up_to(n, max_len);
    let h_free: SharedState = Arc::new(FreeHaarTrace::new(n));
    let h_tensor: SharedState = Arc::new(TensorHaarTrace::new(n));
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for phi in character_family(n, count, cfg.seed.wrapping_add(4))? {
        let mut devs = BTreeMap::new();
        for (label, kind, a, b, h) in [
            ("phi*F h", ProductKind::Free, &phi, &h_free, &h_free),
            ("h*F phi", ProductKind::Free, &h_free, &phi, &h_free),
            ("phi*T h", ProductKind::Tensor, &phi, &h_tensor, &h_tensor),
            ("h*T phi", ProductKind::Tensor, &h_tensor, &phi, &h_tensor),
        ] {
            let conv = convolve(kind, a.clone(), b.clone())?;
            let mut d: f64 = 0.0;
            for w in &words {
                d = d.max((conv.eval(w)? - h.eval(w)?).norm());
            }
            worst = worst.max(d);
            devs.insert(label, d);
        }
        rows.push(json!({"phi": phi.label(), "max_dev": devs}));
    }
    let metrics = json!({"n": n, "words": words.len(), "max_len": max_len, "rows": rows, "max_dev": worst, "tol": TOL});
    let artifact = Some(metrics.to_string());
    Ok(Outcome {
        pass: worst <= TOL,
        summary: format!(
            "{} states, free and tensor, both sides, {} words: max deviation {worst:.1e}",
            count + 2,
            words.len()
        ),
        metrics,
        artifact,
    })
}

fn n1_haar_property(cfg: &Config) -> Result<Outcome> {
    const TOL: f64 = tol::ABSORPTION;
    let h: SharedState = Arc::new(FreeHaarTrace::new(1));
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for phi in character_family(1, 5, cfg.seed.wrapping_add(5))? {
        for kind in ProductKind::ALL {
            let left = convolve(kind, phi.clone(), h.clone())?;
            let right = convolve(kind, h.clone(), phi.clone())?;
            let mut d: f64 = 0.0;
            for k in 0..=4 {
                let w = power_word(k);
                let target = if k == 0 { ONE } else { ZERO };
                d = d
                    .max((left.eval(&w)? - target).norm())
                    .max((right.eval(&w)? - target).norm());
            }
            worst = worst.max(d);
            rows.push(json!({"phi": phi.label(), "kind": kind.name(), "max_dev": d}));
        }
    }
    Ok(outcome(
        worst <= TOL,
        format!("7 states × 5 products × both sides on u^k, k ≤ 4: max deviation {worst:.1e}"),
        json!({"rows": rows, "max_dev": worst, "tol": TOL}),
    ))
}

fn nonexistence_witnesses(_cfg: &Config) -> Result<Outcome> {
    let mut witness_max: f64 = 0.0;
    for n in 2..=3usize {
        for k in 1..=n {
            let s = build_woronowicz_state(n, k)?;
            for p in 1..=n {
                for q in 1..=n {
                    witness_max = witness_max.max(s.eval_letters(&[Letter::u(p, k), Letter::ustar(q, k)])?.norm());
                }
            }
        }
    }
    let mut forced_exact = true;
    let mut rows = Vec::new();
    for n in 2..=3usize {
        let mm1 = moment_matrices(&phi1(n))?;
        let mut rng = sample_rng(6, n as u64);
        let m_h = ComplexMatrix::from_fn(n * n, n * n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let id = ComplexMatrix::identity(n * n);
        forced_exact &= check_boolean_identity(&m_h, &mm1)? == m_h.sub(&id);
        forced_exact &= check_monotone_identity(&m_h, &mm1)? == m_h.sub(&id);
        let b = boolean_counterexample(n)?;
        let m = monotone_counterexample(n)?;
        let h: SharedState = Arc::new(FreeHaarTrace::new(n));
        let free = check_free_obstruction(n, h, ProductKind::Free, 1)?;
        let ht: SharedState = Arc::new(TensorHaarTrace::new(n));
        let tensor = check_free_obstruction(n, ht, ProductKind::Tensor, 1)?;
        rows.push(json!({
            "n": n, "boolean_residual": b.residual_max, "monotone_residual": m.residual_max,
            "boolean_witness": b.witness.word, "monotone_witness": m.witness.word,
            "free_obstruction_residual": free.residual_max, "tensor_obstruction_residual": tensor.residual_max,
            "unitarity_total": free.unitarity_total,
        }));
    }
    let residual_ok = rows.iter().all(|r| {
        (r["boolean_residual"].as_f64().unwrap_or(0.0) - 1.0).abs() <= tol::UNIT_RESIDUAL
            && (r["monotone_residual"].as_f64().unwrap_or(0.0) - 1.0).abs() <= tol::UNIT_RESIDUAL
    });
    let pass = witness_max == 0.0 && forced_exact && residual_ok;
    Ok(outcome(
        pass,
        format!(
            "φ_k(u_pk u*_qk) max {witness_max:e}; φ1 forces M_h = I {}; φ2 residuals {}",
            if forced_exact { "exactly" } else { "NOT exactly" },
            rows.iter()
                .map(|r| format!(
                    "n={} boolean {} monotone {}",
                    r["n"], r["boolean_residual"], r["monotone_residual"]
                ))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        json!({"witness_max": witness_max, "forced_exact": forced_exact, "rows": rows}),
    ))
}

#[derive(Serialize)]
struct BandRow<'a> {
    #[serde(flatten)]
    report: &'a MCReport,
    exact: C64Json,
    sigmas: f64,
}

#[derive(Serialize)]
struct C64Json {
    re: f64,
    im: f64,
}

fn band_rows(reports: &[MCReport], exact: &[C64]) -> (Vec<Value>, f64, f64, usize, String) {
    let mut max_sigma: f64 = 0.0;
    let mut max_stderr: f64 = 0.0;
    let mut outside = 0;
    let mut worst = String::new();
    let rows = reports
        .iter()
        .zip(exact)
        .map(|(r, &e)| {
            let sig = r.sigmas(e);
            if !r.within(e, tol::SIGMA_BAND) {
                outside += 1;
            }
            if sig > max_sigma {
                max_sigma = sig;
                worst = r.word.clone();
            }
            max_stderr = max_stderr.max(r.stderr);
            serde_json::to_value(BandRow {
                report: r,
                exact: C64Json { re: e.re, im: e.im },
                sigmas: sig,
            })
            .expect("serializable")
        })
        .collect();
    (rows, max_sigma, max_stderr, outside, worst)
}

fn random_matrix_limit(cfg: &Config) -> Result<Outcome> {
    let n = 2;
    let (big_n, samples, max_len) = if cfg.full() { (128, 200, 4) } else { (32, 100, 2) };
    let words = words_up_to(n, max_len);
    let reports = mc_estimate_many(&Source::Haar, &words, n, big_n, samples, cfg.seed)?;
    let exact: Vec<C64> = words.iter().map(eval_free_haar).collect::<Result<_>>()?;
    let (rows, max_sigma, max_stderr, outside, worst) = band_rows(&reports, &exact);
    let pass = outside == 0 && max_stderr <= tol::MC_STDERR_MAX;
    let artifact = Some(Value::Array(rows).to_string());
    Ok(Outcome {
        pass,
        summary: format!(
            "{} words, N = {big_n}, {samples} samples: {outside} outside 4σ (max {max_sigma:.2}σ at {worst}), max stderr {max_stderr:.4}",
            words.len()
        ),
        metrics: json!({
            "n": n, "N": big_n, "samples": samples, "seed": cfg.seed, "words": words.len(),
            "outside_4sigma": outside, "max_sigma": max_sigma, "worst_word": worst, "max_stderr": max_stderr,
        }),
        artifact,
    })
}

fn brownian_motion(cfg: &Config) -> Result<Outcome> {
    let (big_n, samples, steps, big_n_blocks) = if cfg.full() {
        (64, 200, 100, 64)
    } else {
        (16, 100, 100, 16)
    };
    let mut unitarity: f64 = 0.0;
    let mut marginal_rows = Vec::new();
    let mut marginal_outside = 0;
    let mut max_sigma_marginal: f64 = 0.0;
    let ks: Vec<Word> = (1..=3).map(power_word).collect();
    for (ti, t) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let seed = cfg.seed.wrapping_add(80 + ti as u64);
        let source = Source::Bm { t, steps };
        let per_sample = sample_map(&source, big_n, samples, seed, |m| {
            let traces: Vec<C64> = ks
                .iter()
                .map(|w| empirical_word_trace(m, 1, w))
                .collect::<Result<_>>()?;
            Ok((m.unitarity_deviation(), traces))
        })?;
        for (k, w) in ks.iter().enumerate() {
            let vals: Vec<C64> = per_sample.iter().map(|(_, tr)| tr[k]).collect();
            let re: Vec<f64> = vals.iter().map(|z| z.re).collect();
            let im: Vec<f64> = vals.iter().map(|z| z.im).collect();
            let (mr, sr) = mean_stderr(&re);
            let (mi, si) = mean_stderr(&im);
            let stderr = sr.max(si);
            let exact = bm_moment_exact(k as u64 + 1, t);
            let gap = (C64::new(mr, mi) - exact).norm();
            let sig = gap / stderr;
            max_sigma_marginal = max_sigma_marginal.max(sig);
            if gap > tol::SIGMA_BAND * stderr {
                marginal_outside += 1;
            }
            marginal_rows.push(json!({
                "t": t, "k": k + 1, "word": w.to_string(), "mean": {"re": mr, "im": mi}, "stderr": stderr,
                "exact": exact, "sigmas": sig,
            }));
        }
        unitarity = per_sample.iter().map(|(u, _)| *u).fold(unitarity, f64::max);
    }
    // t = 8: blocks against the free Haar trace on star-balanced words
    let n = 2;
    let long_t = 8.0;
    let words: Vec<Word> = words_up_to(n, 4)
        .into_iter()
        .filter(|w| 2 * w.count_starred() == w.len())
        .collect();
    let batch = crate::matrix_lab::WordTraceBatch::new(n, &words)?;
    let per_sample = sample_map(
        &Source::Bm { t: long_t, steps },
        n * big_n_blocks,
        samples,
        cfg.seed.wrapping_add(88),
        |m| Ok((m.unitarity_deviation(), batch.traces(m)?)),
    )?;
    unitarity = per_sample.iter().map(|(u, _)| *u).fold(unitarity, f64::max);
    let reports: Vec<MCReport> = words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let vals: Vec<C64> = per_sample.iter().map(|(_, tr)| tr[i]).collect();
            crate::matrix_lab::summarize_values(w.to_string(), n, big_n_blocks, cfg.seed.wrapping_add(88), &vals)
        })
        .collect();
    let exact: Vec<C64> = words.iter().map(eval_free_haar).collect::<Result<_>>()?;
    let (rows, max_sigma_long, _, long_outside, worst) = band_rows(&reports, &exact);
    let pass = unitarity <= tol::UNITARITY && marginal_outside == 0 && long_outside == 0;
    let metrics = json!({
        "max_unitarity_deviation": unitarity,
        "marginals": {"N": big_n, "steps": steps, "samples": samples, "outside_4sigma": marginal_outside, "max_sigma": max_sigma_marginal},
        "t8_blocks": {"n": n, "N": big_n_blocks, "words": words.len(), "outside_4sigma": long_outside, "max_sigma": max_sigma_long, "worst_word": worst},
    });
    let artifact = Some(json!({"marginals": marginal_rows, "t8": rows, "unitarity": unitarity}).to_string());
    Ok(Outcome {
        pass,
        summary: format!(
            "‖U†U−I‖ ≤ {unitarity:.1e}; tr U_t^k: {marginal_outside}/9 outside 4σ (max {max_sigma_marginal:.2}σ); t = 8 blocks: {long_outside}/{} outside 4σ (max {max_sigma_long:.2}σ at {worst})",
            words.len()
        ),
        metrics,
        artifact,
    })
}

fn random_word(n: usize, max_len: usize, rng: &mut impl Rng) -> Word {
    let alpha = alphabet(n);
    let len = rng.random_range(0..=max_len);
    let letters = (0..len).map(|_| alpha[rng.random_range(0..alpha.len())]).collect();
    Word::new(n, letters).expect("alphabet letters")
}

fn schurmann_calculus(cfg: &Config) -> Result<Outcome> {
    let seed = cfg.seed.wrapping_add(9);
    let mut rng = sample_rng(seed, 0);
    let mut triple_max: f64 = 0.0;
    let mut cp_min = f64::INFINITY;
    for inst in 0..20 {
        let (n, d) = (1 + inst % 2, 1 + (inst / 2) % 2);
        let data = TripleDataWhR::random(n, d, &mut rng);
        let t = triple_from_whr(&data)?;
        let words: Vec<Word> = (0..200).map(|_| random_word(n, 5, &mut rng)).collect();
        triple_max = triple_max.max(verify_triple_axioms(&t, &words)?.max_violation);
        cp_min = cp_min.min(conditional_positivity_min_eig(&t, &words_up_to(n, 2))?);
    }
    let mut lift_max: f64 = 0.0;
    let mut grid_dev: f64 = 0.0;
    let mut slope_gap: f64 = 0.0;
    for n in 2..=3 {
        let t = block_lift(&bm_triple(), n)?;
        let words: Vec<Word> = (0..200).map(|_| random_word(n, 5, &mut rng)).collect();
        lift_max = lift_max.max(verify_triple_axioms(&t, &words)?.max_violation);
        grid_dev = grid_dev.max(t.rho_grid().unitarity_deviation());
        cp_min = cp_min.min(conditional_positivity_min_eig(&t, &words_up_to(n, 1))?);
        for w in words_up_to(n, 2) {
            slope_gap = slope_gap.max((t.eval_l(&w)? - free_bm_block_slope(&w, 1e-7)?).norm());
        }
    }
    let bm = bm_triple();
    let mut power_exact = true;
    let mut derivative_gap: f64 = 0.0;
    for k in 0..=6u64 {
        let l = bm.eval_l(&power_word(k as usize))?;
        power_exact &= l == C64::new(-((k * k) as f64) / 2.0, 0.0);
        derivative_gap = derivative_gap.max((l.re - bm_moment_derivative(k, 0.0)).abs());
    }
    // finite differences of tr_N U_dt^k
    let (big_n, samples) = if cfg.full() { (64, 200) } else { (32, 100) };
    let dt = 0.01;
    let fd_steps = 10;
    let mut fd_rows = Vec::new();
    let mut fd_ok = true;
    for k in 1..=3u64 {
        let r = crate::schurmann::generator_vs_bm_finite_difference(k, dt, big_n, fd_steps, samples, seed + k)?;
        fd_ok &= r.max_gap <= tol::SIGMA_BAND * r.mc_stderr + r.bias_bound;
        fd_rows.push(serde_json::to_value(&r).expect("serializable"));
    }
    // lifted generator against MC block slopes on u_ij u*_kl
    let n = 2;
    let lifted = block_lift(&bm, n)?;
    let block_words: Vec<Word> = words_up_to(n, 2)
        .into_iter()
        .filter(|w| w.len() == 2 && !w.letters()[0].star && w.letters()[1].star)
        .collect();
    let batch = crate::matrix_lab::WordTraceBatch::new(n, &block_words)?;
    let per_sample = sample_map(
        &Source::Bm { t: dt, steps: fd_steps },
        n * big_n / 2,
        samples,
        seed + 100,
        |m| batch.traces(m),
    )?;
    let mut block_ok = true;
    let mut block_max_sigma: f64 = 0.0;
    for (i, w) in block_words.iter().enumerate() {
        let delta = crate::brown_words::counit(w).re;
        let slopes: Vec<f64> = per_sample.iter().map(|tr| (tr[i].re - delta) / dt).collect();
        let (mean, se) = mean_stderr(&slopes);
        let l = lifted.eval_l(w)?.re;
        block_ok &= (mean - l).abs() <= tol::SIGMA_BAND * se + tol::BLOCK_SLOPE_BIAS * dt;
        block_max_sigma = block_max_sigma.max((mean - l).abs() / se);
    }
    let pass = triple_max <= tol::AXIOM
        && lift_max <= tol::AXIOM
        && grid_dev <= tol::GRID_UNITARITY
        && power_exact
        && derivative_gap <= tol::DERIVATIVE
        && fd_ok
        && cp_min >= -tol::CONDITIONAL_POSITIVITY
        && slope_gap <= tol::LIFTED_SLOPE
        && block_ok;
    let metrics = json!({
        "random_triples_max_violation": triple_max, "lifted_max_violation": lift_max, "lifted_grid_unitarity": grid_dev,
        "bm_powers_exact": power_exact, "derivative_gap": derivative_gap, "conditional_positivity_min_eig": cp_min,
        "lifted_vs_free_block_slope": slope_gap, "finite_difference": fd_rows, "block_slopes_ok": block_ok,
        "block_slopes_max_sigma": block_max_sigma,
    });
    let artifact = Some(metrics.to_string());
    Ok(Outcome {
        pass,
        summary: format!(
            "axioms: random {triple_max:.1e}, lifted {lift_max:.1e}; L(u^k) = −k²/2 {}; derivative gap {derivative_gap:.1e}; finite differences {}; block slopes {}",
            if power_exact { "exact" } else { "INEXACT" },
            if fd_ok { "within band" } else { "OUTSIDE band" },
            if block_ok { "within band" } else { "OUTSIDE band" },
        ),
        metrics,
        artifact,
    })
}

fn run_in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::Invalid(e.to_string()))?;
    Ok(pool.install(f))
}

/// Re-runs the randomized criteria under a different worker count and
/// compares their artifacts byte for byte. Missing baselines are produced
/// with a single worker first.
fn determinism(cfg: &Config, baseline: &BTreeMap<u8, String>) -> Result<Outcome> {
    let ambient = rayon::current_num_threads();
    let other = ambient + 2;
    let mut rows = Vec::new();
    let mut pass = true;
    for id in RANDOMIZED {
        let first = match baseline.get(&id) {
            Some(a) => a.clone(),
            None => run_in_pool(1, || run_criterion(id, cfg))??.artifact.unwrap_or_default(),
        };
        let second = run_in_pool(other, || run_criterion(id, cfg))??
            .artifact
            .unwrap_or_default();
        let same = !first.is_empty() && first == second;
        pass &= same;
        rows.push(json!({"criterion": id, "bytes": first.len(), "identical": same}));
    }
    Ok(outcome(
        pass,
        format!(
            "criteria {:?} re-run with {other} workers: {}",
            RANDOMIZED,
            if pass { "byte-identical" } else { "DIFFERENT" }
        ),
        json!({"threads": other, "rows": rows}),
    ))
}
