//! Schürmann triples (ρ, η, L) on U⟨n⟩: generator data, evaluation on words
//! by recursion, the (W, h, R) parametrization, the block lift from U⟨1⟩ to
//! U⟨n⟩, and the unitary Brownian motion generator.
//!
//! Vectors live in C^d with the inner product conjugate-linear in the first
//! slot. After a lift, H ⊗ M_n carries tr_n(A†B) on the matrix factor, which
//! in coordinates means the orthonormal basis √n·E_ab.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::brown_words::{adjoint, all_unitarity_relations, Letter, Word, WordPoly};
use crate::error::{Error, Result};
use crate::linalg::{eigh_jacobi, inner, ComplexMatrix, C64, I, ONE, ZERO};
use crate::matrix_lab::{bm_moment_exact, free_bm_block_state, mean_stderr, sample_map, Source};
use crate::states::{MatrixJson, StateEvaluator, HERMITIAN_TOL, UNITARY_TOL};

fn slot(n: usize, l: Letter) -> usize {
    let base = (l.row - 1) * n + (l.col - 1);
    if l.star {
        n * n + base
    } else {
        base
    }
}

fn add_vec(a: &mut [C64], b: &[C64], s: C64) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}

#[derive(Clone, Debug)]
pub struct SchurmannTriple {
    n: usize,
    d: usize,
    rho: Vec<ComplexMatrix>,
    eta: Vec<Vec<C64>>,
    l: Vec<C64>,
}

impl SchurmannTriple {
    /// Generator data indexed by letter: `rho(u)`, `eta(u)`, `l(u)`. Only
    /// shapes are checked here; the axioms are the job of
    /// [`verify_triple_axioms`].
    pub fn from_generators(
        n: usize,
        d: usize,
        rho: impl Fn(Letter) -> ComplexMatrix,
        eta: impl Fn(Letter) -> Vec<C64>,
        l: impl Fn(Letter) -> C64,
    ) -> Result<Self> {
        let letters = crate::brown_words::alphabet(n);
        let mut t = Self {
            n,
            d,
            rho: vec![ComplexMatrix::zeros(d, d); 2 * n * n],
            eta: vec![vec![ZERO; d]; 2 * n * n],
            l: vec![ZERO; 2 * n * n],
        };
        for a in letters {
            let s = slot(n, a);
            let r = rho(a);
            if r.rows() != d || r.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.rows(),
                });
            }
            let e = eta(a);
            if e.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: e.len(),
                });
            }
            t.rho[s] = r;
            t.eta[s] = e;
            t.l[s] = l(a);
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Dimension of the representation space.
    pub fn space_dim(&self) -> usize {
        self.d
    }

    pub fn rho_gen(&self, a: Letter) -> &ComplexMatrix {
        &self.rho[slot(self.n, a)]
    }

    pub fn eta_gen(&self, a: Letter) -> &[C64] {
        &self.eta[slot(self.n, a)]
    }

    pub fn l_gen(&self, a: Letter) -> C64 {
        self.l[slot(self.n, a)]
    }

    pub fn set_eta_gen(&mut self, a: Letter, v: Vec<C64>) {
        let s = slot(self.n, a);
        self.eta[s] = v;
    }

    pub fn set_l_gen(&mut self, a: Letter, v: C64) {
        let s = slot(self.n, a);
        self.l[s] = v;
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        if w.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: w.dim(),
            });
        }
        Ok(())
    }

    pub fn eval_rho(&self, w: &Word) -> Result<ComplexMatrix> {
        self.check_word(w)?;
        Ok(w.letters()
            .iter()
            .fold(ComplexMatrix::identity(self.d), |acc, &a| acc.matmul(self.rho_gen(a))))
    }

    /// (η(w), δ(w)) with η(a·s) = ρ(a)η(s) + η(a)δ(s), right to left.
    fn eta_delta(&self, letters: &[Letter]) -> (Vec<C64>, C64) {
        let mut eta = vec![ZERO; self.d];
        let mut delta = ONE;
        for &a in letters.iter().rev() {
            let mut next = self.rho_gen(a).mul_vec(&eta);
            add_vec(&mut next, self.eta_gen(a), delta);
            eta = next;
            delta *= a.counit();
        }
        (eta, delta)
    }

    pub fn eval_eta(&self, w: &Word) -> Result<Vec<C64>> {
        self.check_word(w)?;
        Ok(self.eta_delta(w.letters()).0)
    }

    /// L(a·s) = δ(a)L(s) + ⟨η(a*), η(s)⟩ + L(a)δ(s), a the first letter.
    pub fn eval_l(&self, w: &Word) -> Result<C64> {
        self.check_word(w)?;
        let mut eta = vec![ZERO; self.d];
        let mut delta = ONE;
        let mut l = ZERO;
        for &a in w.letters().iter().rev() {
            l = a.counit() * l + inner(self.eta_gen(a.adjoint()), &eta) + self.l_gen(a) * delta;
            let mut next = self.rho_gen(a).mul_vec(&eta);
            add_vec(&mut next, self.eta_gen(a), delta);
            eta = next;
            delta *= a.counit();
        }
        Ok(l)
    }

    pub fn eval_l_poly(&self, p: &WordPoly) -> Result<C64> {
        p.eval_with(|w| self.eval_l(w))
    }

    pub fn eval_eta_poly(&self, p: &WordPoly) -> Result<Vec<C64>> {
        let mut out = vec![ZERO; self.d];
        for (w, c) in p.terms() {
            add_vec(&mut out, &self.eval_eta(&w)?, c);
        }
        Ok(out)
    }

    pub fn eval_rho_poly(&self, p: &WordPoly) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for (w, c) in p.terms() {
            out = out.add(&self.eval_rho(&w)?.scale(c));
        }
        Ok(out)
    }

    /// The dn×dn operator grid (ρ(u_ij))_ij.
    pub fn rho_grid(&self) -> ComplexMatrix {
        let (n, d) = (self.n, self.d);
        let mut g = ComplexMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                g.set_block(i, j, self.rho_gen(Letter::u(i + 1, j + 1)));
            }
        }
        g
    }
}

fn vec_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomReport {
    pub words_checked: usize,
    /// max over splits w = ab of |η(ab) − ρ(a)η(b) − η(a)δ(b)|
    pub eta_violation: f64,
    /// max over splits of |L(ab) − δ(a)L(b) − ⟨η(a*),η(b)⟩ − L(a)δ(b)|
    pub l_violation: f64,
    /// max |L(w*) − conj L(w)|
    pub hermitian_violation: f64,
    /// max of ρ(a*) − ρ(a)† over generators
    pub star_violation: f64,
    /// ρ, η and L on the unitarity relations
    pub relation_violation: f64,
    pub max_violation: f64,
}

pub fn verify_triple_axioms(t: &SchurmannTriple, words: &[Word]) -> Result<AxiomReport> {
    let mut rep = AxiomReport::default();
    for w in words {
        t.check_word(w)?;
        let letters = w.letters();
        let (eta_w, _) = t.eta_delta(letters);
        let l_w = t.eval_l(w)?;
        for split in 0..=letters.len() {
            let a = Word::new(t.n, letters[..split].to_vec())?;
            let b = Word::new(t.n, letters[split..].to_vec())?;
            let (eta_a, delta_a) = t.eta_delta(a.letters());
            let (eta_b, delta_b) = t.eta_delta(b.letters());
            let mut rhs = t.eval_rho(&a)?.mul_vec(&eta_b);
            add_vec(&mut rhs, &eta_a, delta_b);
            rep.eta_violation = rep.eta_violation.max(vec_dist(&eta_w, &rhs));
            let eta_astar = t.eval_eta(&adjoint(&a))?;
            let rhs = delta_a * t.eval_l(&b)? + inner(&eta_astar, &eta_b) + t.eval_l(&a)? * delta_b;
            rep.l_violation = rep.l_violation.max((l_w - rhs).norm());
        }
        let l_adj = t.eval_l(&adjoint(w))?;
        rep.hermitian_violation = rep.hermitian_violation.max((l_adj - l_w.conj()).norm());
        rep.words_checked += 1;
    }
    for a in crate::brown_words::alphabet(t.n) {
        let dev = t.rho_gen(a.adjoint()).max_abs_diff(&t.rho_gen(a).adjoint());
        rep.star_violation = rep.star_violation.max(dev);
        let dev = (t.l_gen(a.adjoint()) - t.l_gen(a).conj()).norm();
        rep.hermitian_violation = rep.hermitian_violation.max(dev);
    }
    for rel in all_unitarity_relations(t.n) {
        let r = t.eval_rho_poly(&rel)?.max_abs();
        let e = t.eval_eta_poly(&rel)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let l = t.eval_l_poly(&rel)?.norm();
        rep.relation_violation = rep.relation_violation.max(r.max(e).max(l));
    }
    rep.max_violation = [
        rep.eta_violation,
        rep.l_violation,
        rep.hermitian_violation,
        rep.star_violation,
        rep.relation_violation,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(rep)
}

/// W: n×n grid of d×d blocks, unitary as a dn×dn matrix; h: n×n grid of
/// vectors in C^d (row-major, h[i*n + j] = h_{i+1,j+1}); R selfadjoint n×n.
#[derive(Clone, Debug)]
pub struct TripleDataWhR {
    pub n: usize,
    pub d: usize,
    pub w: ComplexMatrix,
    pub h: Vec<Vec<C64>>,
    pub r: ComplexMatrix,
}

impl TripleDataWhR {
    pub fn validate(&self) -> Result<()> {
        let (n, d) = (self.n, self.d);
        if self.w.rows() != n * d || self.w.cols() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: self.w.rows(),
            });
        }
        if self.r.rows() != n || self.r.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.r.rows(),
            });
        }
        if self.h.len() != n * n || self.h.iter().any(|v| v.len() != d) {
            return Err(Error::Shape(format!(
                "h must be an {n}×{n} grid of vectors of length {d}"
            )));
        }
        let dev = self.w.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        let dev = self.r.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotSelfAdjoint { deviation: dev });
        }
        Ok(())
    }

    fn w_block(&self, i: usize, j: usize) -> ComplexMatrix {
        self.w.block(self.n, i, j)
    }

    fn h_vec(&self, i: usize, j: usize) -> &[C64] {
        &self.h[i * self.n + j]
    }

    /// Draws W Haar, h and R Gaussian.
    pub fn random(n: usize, d: usize, rng: &mut impl Rng) -> Self {
        let w = crate::matrix_lab::sample_haar_unitary(n * d, rng);
        let g = crate::matrix_lab::sample_ginibre(n.max(d), rng);
        let h = (0..n * n)
            .map(|_| crate::matrix_lab::sample_ginibre(d, rng).row(0).to_vec())
            .collect();
        let a = ComplexMatrix::from_fn(n, n, |i, j| g[(i, j)]);
        let r = a.add(&a.adjoint()).scale(C64::new(0.5, 0.0));
        Self { n, d, w, h, r }
    }
}

/// ρ(u_ij) = W_ij, η(u_ij) = h_ij, η(u*_ij) = −Σ_k W_kj† h_ki,
/// L(u_ij) = iR_ij − ½Σ_k⟨h_ki, h_kj⟩ and L(u*_ij) = conj L(u_ij).
pub fn triple_from_whr(data: &TripleDataWhR) -> Result<SchurmannTriple> {
    data.validate()?;
    let (n, d) = (data.n, data.d);
    let eta_star = |i: usize, j: usize| {
        let mut v = vec![ZERO; d];
        for k in 0..n {
            add_vec(&mut v, &data.w_block(k, j).adjoint().mul_vec(data.h_vec(k, i)), -ONE);
        }
        v
    };
    let l_u = |i: usize, j: usize| {
        let s: C64 = (0..n).map(|k| inner(data.h_vec(k, i), data.h_vec(k, j))).sum();
        I * data.r[(i, j)] - 0.5 * s
    };
    SchurmannTriple::from_generators(
        n,
        d,
        |a| {
            let b = data.w_block(a.row - 1, a.col - 1);
            if a.star {
                b.adjoint()
            } else {
                b
            }
        },
        |a| {
            if a.star {
                eta_star(a.row - 1, a.col - 1)
            } else {
                data.h_vec(a.row - 1, a.col - 1).to_vec()
            }
        },
        |a| {
            let v = l_u(a.row - 1, a.col - 1);
            if a.star {
                v.conj()
            } else {
                v
            }
        },
    )
}

/// Reads (W, h, R) back from a triple: R_ij = −i(L(u_ij) + ½Σ_k⟨h_ki, h_kj⟩).
pub fn whr_from_triple(t: &SchurmannTriple) -> TripleDataWhR {
    let n = t.n;
    let w = t.rho_grid();
    let h: Vec<Vec<C64>> = (0..n * n)
        .map(|s| t.eta_gen(Letter::u(s / n + 1, s % n + 1)).to_vec())
        .collect();
    let r = ComplexMatrix::from_fn(n, n, |i, j| {
        let s: C64 = (0..n).map(|k| inner(&h[k * n + i], &h[k * n + j])).sum();
        -I * (t.l_gen(Letter::u(i + 1, j + 1)) + 0.5 * s)
    });
    TripleDataWhR { n, d: t.d, w, h, r }
}

/// Lift of a triple on U⟨1⟩ with space H to U⟨n⟩ with space H ⊗ M_n:
/// ρ_n(u_ij) = (1/n)(ρ(u) − I) ⊗ L_{E_ij} + δ_ij I, η_n(u_ij) = η(u) ⊗ E_ij,
/// η_n(u*_ij) = η(u*) ⊗ E_ji, L_n(u_ij) = δ_ij L(u), L_n(u*_ij) = δ_ij L(u*).
pub fn block_lift(base: &SchurmannTriple, n: usize) -> Result<SchurmannTriple> {
    if base.n != 1 {
        return Err(Error::Invalid(format!(
            "block_lift needs a triple on U<1>, got n = {}",
            base.n
        )));
    }
    if n == 0 {
        return Err(Error::Invalid("n must be ≥ 1".into()));
    }
    let d = base.d;
    let dim = d * n * n;
    let u = Letter::u(1, 1);
    let us = Letter::ustar(1, 1);
    let scale = 1.0 / (n as f64).sqrt();
    // coordinate of α ⊗ √n E_ab
    let idx = |alpha: usize, a: usize, b: usize| (alpha * n + a) * n + b;
    let rho = |a: Letter| {
        let base_rho = if a.star { base.rho_gen(us) } else { base.rho_gen(u) };
        let (i, j) = if a.star {
            (a.col - 1, a.row - 1)
        } else {
            (a.row - 1, a.col - 1)
        };
        // (1/n)(ρ − I) ⊗ L_{E_ij}: E_ij E_jb = E_ib
        let mut m = ComplexMatrix::zeros(dim, dim);
        for alpha in 0..d {
            for beta in 0..d {
                let c = (base_rho[(alpha, beta)] - if alpha == beta { ONE } else { ZERO }) / n as f64;
                if c == ZERO {
                    continue;
                }
                for b in 0..n {
                    m[(idx(alpha, i, b), idx(beta, j, b))] += c;
                }
            }
        }
        if i == j {
            m = m.add(&ComplexMatrix::identity(dim));
        }
        m
    };
    let eta = |a: Letter| {
        let (src, i, j) = if a.star {
            (base.eta_gen(us), a.col - 1, a.row - 1)
        } else {
            (base.eta_gen(u), a.row - 1, a.col - 1)
        };
        let mut v = vec![ZERO; dim];
        for (alpha, x) in src.iter().enumerate() {
            v[idx(alpha, i, j)] = x * scale;
        }
        v
    };
    let l = |a: Letter| {
        if a.row != a.col {
            ZERO
        } else if a.star {
            base.l_gen(us)
        } else {
            base.l_gen(u)
        }
    };
    SchurmannTriple::from_generators(n, dim, rho, eta, l)
}

/// ρ = 1, η(u) = −i, η(u*) = i, L(u) = L(u*) = −½.
pub fn bm_triple() -> SchurmannTriple {
    let data = TripleDataWhR {
        n: 1,
        d: 1,
        w: ComplexMatrix::identity(1),
        h: vec![vec![-I]],
        r: ComplexMatrix::zeros(1, 1),
    };
    triple_from_whr(&data).expect("valid data")
}

/// Smallest eigenvalue of [L((w_a − δ(w_a))* (w_b − δ(w_b)))] over the
/// given words.
pub fn conditional_positivity_min_eig(t: &SchurmannTriple, words: &[Word]) -> Result<f64> {
    let k = words.len();
    if k == 0 {
        return Ok(0.0);
    }
    let mut g = ComplexMatrix::zeros(k, k);
    for (a, wa) in words.iter().enumerate() {
        let da = crate::brown_words::counit(wa);
        let la_star = t.eval_l(&adjoint(wa))?;
        for (b, wb) in words.iter().enumerate() {
            let db = crate::brown_words::counit(wb);
            let l_ab = t.eval_l(&adjoint(wa).concat(wb)?)?;
            g[(a, b)] = l_ab - da.conj() * t.eval_l(wb)? - db * la_star;
        }
    }
    let herm = g.add(&g.adjoint()).scale(C64::new(0.5, 0.0));
    Ok(eigh_jacobi(&herm)?.values[0])
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorReport {
    pub k: u64,
    pub dt: f64,
    pub big_n: usize,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    /// (mean tr_N U_dt^k − 1)/dt
    pub mc_slope: f64,
    pub mc_stderr: f64,
    /// (τ(u_dt^k) − 1)/dt from the closed form
    pub exact_slope: f64,
    /// L(u^k) by recursion
    pub generator: f64,
    pub bias_bound: f64,
    /// max(4·stderr, bias bound)
    pub tolerance: f64,
    pub max_gap: f64,
    pub pass: bool,
}

/// Finite-difference slope of tr_N U_dt^k against the generator value.
pub fn generator_vs_bm_finite_difference(
    k: u64,
    dt: f64,
    big_n: usize,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<GeneratorReport> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Invalid(format!("dt must be > 0, got {dt}")));
    }
    let w = crate::matrix_lab::power_word(k as usize);
    let traces = sample_map(&Source::Bm { t: dt, steps }, big_n, samples, seed, |m| {
        crate::matrix_lab::empirical_word_trace(m, 1, &w)
    })?;
    let slopes: Vec<f64> = traces.iter().map(|z| (z.re - 1.0) / dt).collect();
    let (mc_slope, mc_stderr) = mean_stderr(&slopes);
    let exact_slope = (bm_moment_exact(k, dt) - 1.0) / dt;
    let generator = bm_triple().eval_l(&w)?.re;
    let bias_bound = 2.0 * (k as f64).powi(3) * dt;
    let tolerance = (4.0 * mc_stderr).max(bias_bound);
    let max_gap = [
        (mc_slope - exact_slope).abs(),
        (mc_slope - generator).abs(),
        (exact_slope - generator).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(GeneratorReport {
        k,
        dt,
        big_n,
        steps,
        samples,
        seed,
        mc_slope,
        mc_stderr,
        exact_slope,
        generator,
        bias_bound,
        tolerance,
        max_gap,
        pass: max_gap <= tolerance,
    })
}

/// d/dt at 0 of the free Brownian block state on `w`, by a one-sided
/// difference of the exact state with step `eps`.
pub fn free_bm_block_slope(w: &Word, eps: f64) -> Result<C64> {
    let s = free_bm_block_state(w.dim(), eps);
    Ok((s.eval(w)? - crate::brown_words::counit(w)) / eps)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VectorGridJson {
    pub re: Vec<Vec<Vec<f64>>>,
    pub im: Vec<Vec<Vec<f64>>>,
}

/// `{"n":..,"d":..,"W":{n:dn,re,im},"h":{re:[n][n][d],im:..},"R":{n,re,im}}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TripleJson {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "W")]
    pub w: MatrixJson,
    pub h: VectorGridJson,
    #[serde(rename = "R")]
    pub r: MatrixJson,
}

impl TripleJson {
    pub fn from_data(data: &TripleDataWhR) -> Self {
        let n = data.n;
        let grid = |f: fn(&C64) -> f64| {
            (0..n)
                .map(|i| (0..n).map(|j| data.h_vec(i, j).iter().map(f).collect()).collect())
                .collect()
        };
        Self {
            n,
            d: data.d,
            w: MatrixJson::from_matrix(&data.w),
            h: VectorGridJson {
                re: grid(|z| z.re),
                im: grid(|z| z.im),
            },
            r: MatrixJson::from_matrix(&data.r),
        }
    }

    pub fn to_data(&self) -> Result<TripleDataWhR> {
        let (n, d) = (self.n, self.d);
        let shape_ok =
            |g: &Vec<Vec<Vec<f64>>>| g.len() == n && g.iter().all(|r| r.len() == n && r.iter().all(|v| v.len() == d));
        if !shape_ok(&self.h.re) || !shape_ok(&self.h.im) {
            return Err(Error::Shape(format!("h must be {n}×{n}×{d}")));
        }
        let h = (0..n * n)
            .map(|s| {
                let (i, j) = (s / n, s % n);
                (0..d)
                    .map(|a| C64::new(self.h.re[i][j][a], self.h.im[i][j][a]))
                    .collect()
            })
            .collect();
        let data = TripleDataWhR {
            n,
            d,
            w: self.w.to_matrix()?,
            h,
            r: self.r.to_matrix()?,
        };
        data.validate()?;
        Ok(data)
    }
}

pub fn load_triple_json(text: &str) -> Result<TripleDataWhR> {
    let parsed: TripleJson = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    parsed.to_data()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brown_words::{words_up_to, RelationSide};
    use crate::matrix_lab::{power_word, sample_rng};

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn bm_triple_values() {
        let t = bm_triple();
        let u = Letter::u(1, 1);
        let us = Letter::ustar(1, 1);
        assert!(close(t.eta_gen(u)[0], -I));
        assert!(close(t.eta_gen(us)[0], I));
        assert!(close(t.l_gen(u), C64::new(-0.5, 0.0)));
        for k in 0..=6usize {
            let w = power_word(k);
            assert!(close(t.eval_eta(&w).unwrap()[0], -I * k as f64));
            assert!(close(t.eval_l(&w).unwrap(), C64::new(-((k * k) as f64) / 2.0, 0.0)));
        }
        assert!(close(t.eval_l(&Word::parse(1, "u11 u11*").unwrap()).unwrap(), ZERO));
    }

    #[test]
    fn trivial_triple_is_zero() {
        let data = TripleDataWhR {
            n: 2,
            d: 1,
            w: ComplexMatrix::identity(2),
            h: vec![vec![ZERO]; 4],
            r: ComplexMatrix::zeros(2, 2),
        };
        let t = triple_from_whr(&data).unwrap();
        let rep = verify_triple_axioms(&t, &words_up_to(2, 3)).unwrap();
        assert_eq!(rep.max_violation, 0.0);
        for w in words_up_to(2, 3) {
            assert_eq!(t.eval_l(&w).unwrap(), ZERO);
        }
    }

    #[test]
    fn random_triples_satisfy_the_axioms_and_round_trip() {
        let mut rng = sample_rng(11, 0);
        let words = words_up_to(2, 3);
        for d in 1..=2 {
            let data = TripleDataWhR::random(2, d, &mut rng);
            let t = triple_from_whr(&data).unwrap();
            let rep = verify_triple_axioms(&t, &words).unwrap();
            assert!(rep.max_violation < 1e-10, "{rep:?}");
            let back = whr_from_triple(&t);
            assert!(back.w.max_abs_diff(&data.w) == 0.0);
            assert!(back.r.max_abs_diff(&data.r) < 1e-14);
        }
    }

    #[test]
    fn corrupted_eta_is_caught() {
        let mut t = bm_triple();
        let u = Letter::u(1, 1);
        let v = t.eta_gen(u).to_vec();
        t.set_eta_gen(u, vec![-v[0]]);
        let rep = verify_triple_axioms(&t, &words_up_to(1, 3)).unwrap();
        assert!(rep.max_violation > 0.1);
    }

    #[test]
    fn lifted_bm_triple() {
        for n in 1..=3 {
            let t = block_lift(&bm_triple(), n).unwrap();
            assert_eq!(t.space_dim(), n * n);
            assert!(t.rho_grid().unitarity_deviation() < 1e-12);
            let rep = verify_triple_axioms(&t, &words_up_to(n, if n < 3 { 3 } else { 2 })).unwrap();
            assert!(rep.max_violation < 1e-12, "n={n}: {rep:?}");
            for i in 1..=n {
                for j in 1..=n {
                    let l = t.l_gen(Letter::u(i, j));
                    assert!(close(l, C64::new(if i == j { -0.5 } else { 0.0 }, 0.0)));
                    let rel = crate::brown_words::unitarity_relation(n, i, j, RelationSide::Left).unwrap();
                    assert!(t.eval_l_poly(&rel).unwrap().norm() < 1e-14);
                }
            }
        }
        assert!(block_lift(&block_lift(&bm_triple(), 2).unwrap(), 2).is_err());
    }

    #[test]
    fn lifted_generator_matches_the_free_block_slope() {
        let t = block_lift(&bm_triple(), 2).unwrap();
        for w in words_up_to(2, 2) {
            let l = t.eval_l(&w).unwrap();
            let s = free_bm_block_slope(&w, 1e-7).unwrap();
            assert!((l - s).norm() < 1e-5, "{w}: {l} vs {s}");
        }
    }

    #[test]
    fn conditional_positivity() {
        let mut rng = sample_rng(12, 0);
        let t = triple_from_whr(&TripleDataWhR::random(2, 2, &mut rng)).unwrap();
        assert!(conditional_positivity_min_eig(&t, &words_up_to(2, 2)).unwrap() > -1e-8);
    }

    #[test]
    fn triple_json_round_trip() {
        let data = TripleDataWhR::random(2, 2, &mut sample_rng(13, 0));
        let text = serde_json::to_string(&TripleJson::from_data(&data)).unwrap();
        let back = load_triple_json(&text).unwrap();
        assert_eq!(back.w, data.w);
        assert_eq!(back.h, data.h);
        assert!(load_triple_json("{\"n\":1}").is_err());
    }
}
