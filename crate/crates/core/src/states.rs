//! States on U⟨n⟩: characters, finite mixtures of characters, vector states
//! of block representations, and the structural checks shared by all of them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::brown_words::{adjoint, Letter, Word, WordPoly};
use crate::error::{Error, Result};
use crate::linalg::{eigh_jacobi, ComplexMatrix, C64, ONE, ZERO};

pub const UNITARY_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-8;

/// A linear functional on U⟨n⟩, evaluated on words.
pub trait StateEvaluator: Send + Sync {
    fn dim(&self) -> usize;

    fn eval_letters(&self, letters: &[Letter]) -> Result<C64>;

    fn label(&self) -> String;

    fn eval(&self, w: &Word) -> Result<C64> {
        if w.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.dim(),
            });
        }
        self.eval_letters(w.letters())
    }

    fn eval_poly(&self, p: &WordPoly) -> Result<C64> {
        p.eval_with(|w| self.eval(w))
    }
}

pub type SharedState = Arc<dyn StateEvaluator>;

impl<S: StateEvaluator + ?Sized> StateEvaluator for Arc<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval_letters(&self, letters: &[Letter]) -> Result<C64> {
        (**self).eval_letters(letters)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

fn require_unitary(m: &ComplexMatrix) -> Result<()> {
    let deviation = m.unitarity_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// φ(u_ij) = V_ij extended multiplicatively; φ(u*_ij) = conj(V_ij).
#[derive(Clone, Debug)]
pub struct CharacterState {
    v: ComplexMatrix,
}

impl CharacterState {
    pub fn new(v: ComplexMatrix) -> Result<Self> {
        if !v.is_square() || v.rows() == 0 {
            return Err(Error::Shape("character needs a non-empty square matrix".into()));
        }
        require_unitary(&v)?;
        Ok(Self { v })
    }

    /// The counit δ.
    pub fn counit(n: usize) -> Self {
        Self {
            v: ComplexMatrix::identity(n),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.v
    }
}

fn character_value(v: &ComplexMatrix, letters: &[Letter]) -> C64 {
    let mut acc = ONE;
    for l in letters {
        let z = v[(l.row - 1, l.col - 1)];
        acc *= if l.star { z.conj() } else { z };
        if acc == ZERO {
            break;
        }
    }
    acc
}

fn check_letters(n: usize, letters: &[Letter]) -> Result<()> {
    for l in letters {
        for index in [l.row, l.col] {
            if index == 0 || index > n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
    }
    Ok(())
}

impl StateEvaluator for CharacterState {
    fn dim(&self) -> usize {
        self.v.rows()
    }
    fn eval_letters(&self, letters: &[Letter]) -> Result<C64> {
        check_letters(self.dim(), letters)?;
        Ok(character_value(&self.v, letters))
    }
    fn label(&self) -> String {
        "character".into()
    }
}

/// Σ_k w_k · character(V_k) with w_k > 0, Σ w_k = 1.
#[derive(Clone, Debug)]
pub struct FiniteMeasureState {
    n: usize,
    atoms: Vec<(f64, ComplexMatrix)>,
}

impl FiniteMeasureState {
    pub fn new(atoms: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        let n = atoms
            .first()
            .map(|(_, m)| m.rows())
            .ok_or_else(|| Error::Invalid("measure needs at least one atom".into()))?;
        let mut total = 0.0;
        for (w, m) in &atoms {
            if w.is_nan() || *w <= 0.0 {
                return Err(Error::Invalid(format!("atom weight {w} is not positive")));
            }
            if m.rows() != n || !m.is_square() {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.rows(),
                });
            }
            require_unitary(m)?;
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { n, atoms })
    }

    pub fn atoms(&self) -> &[(f64, ComplexMatrix)] {
        &self.atoms
    }
}

impl StateEvaluator for FiniteMeasureState {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval_letters(&self, letters: &[Letter]) -> Result<C64> {
        check_letters(self.n, letters)?;
        Ok(self.atoms.iter().map(|(w, m)| *w * character_value(m, letters)).sum())
    }
    fn label(&self) -> String {
        "mixture".into()
    }
}

/// a ↦ ⟨e_v, j(a) e_v⟩ for the block representation j(u_ij) = M_ij
/// (d×d blocks of a unitary of size dn).
#[derive(Clone, Debug)]
pub struct RepVectorState {
    n: usize,
    d: usize,
    blocks: Vec<ComplexMatrix>,
    v: usize,
}

impl RepVectorState {
    /// `v` is a 1-based basis index in 1..=d.
    pub fn new(n: usize, d: usize, m: &ComplexMatrix, v: usize) -> Result<Self> {
        if m.rows() != n * d || !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: m.rows(),
            });
        }
        if v == 0 || v > d {
            return Err(Error::IndexOutOfRange { index: v, n: d });
        }
        require_unitary(m)?;
        let mut blocks = Vec::with_capacity(2 * n * n);
        for star in [false, true] {
            for i in 0..n {
                for j in 0..n {
                    let b = m.block(n, i, j);
                    blocks.push(if star { b.adjoint() } else { b });
                }
            }
        }
        Ok(Self { n, d, blocks, v })
    }

    fn block_of(&self, l: &Letter) -> &ComplexMatrix {
        let k = usize::from(l.star) * self.n * self.n + (l.row - 1) * self.n + (l.col - 1);
        &self.blocks[k]
    }

    /// j(w) as a d×d matrix.
    pub fn represent(&self, letters: &[Letter]) -> ComplexMatrix {
        letters
            .iter()
            .fold(ComplexMatrix::identity(self.d), |acc, l| acc.matmul(self.block_of(l)))
    }
}

impl StateEvaluator for RepVectorState {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval_letters(&self, letters: &[Letter]) -> Result<C64> {
        check_letters(self.n, letters)?;
        let mut x = vec![ZERO; self.d];
        x[self.v - 1] = ONE;
        for l in letters.iter().rev() {
            x = self.block_of(l).mul_vec(&x);
        }
        Ok(x[self.v - 1])
    }
    fn label(&self) -> String {
        "rep-vector".into()
    }
}

/// A state given by a closure; handy for fixtures and negative controls.
pub struct FnState<F> {
    n: usize,
    f: F,
    label: String,
}

impl<F: Fn(&[Letter]) -> C64 + Send + Sync> FnState<F> {
    pub fn new(n: usize, label: impl Into<String>, f: F) -> Self {
        Self {
            n,
            f,
            label: label.into(),
        }
    }
}

impl<F: Fn(&[Letter]) -> C64 + Send + Sync> StateEvaluator for FnState<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval_letters(&self, letters: &[Letter]) -> Result<C64> {
        check_letters(self.n, letters)?;
        Ok((self.f)(letters))
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// N = (φ(u_ij)), N̄ = (φ(u*_ij)), M with M[(i,k),(j,l)] = φ(u*_ij u_kl),
/// and M' with M'[(i,k),(j,l)] = φ(u_ij u*_kl). Pair indices are row-major.
#[derive(Clone, Debug)]
pub struct MomentMatrices {
    pub n: ComplexMatrix,
    pub nbar: ComplexMatrix,
    pub m: ComplexMatrix,
    pub m_rev: ComplexMatrix,
}

pub fn moment_matrices(s: &dyn StateEvaluator) -> Result<MomentMatrices> {
    let n = s.dim();
    let mut nm = ComplexMatrix::zeros(n, n);
    let mut nbar = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            nm[(i, j)] = s.eval_letters(&[Letter::u(i + 1, j + 1)])?;
            nbar[(i, j)] = s.eval_letters(&[Letter::ustar(i + 1, j + 1)])?;
        }
    }
    let mut m = ComplexMatrix::zeros(n * n, n * n);
    let mut m_rev = ComplexMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let (r, c) = (i * n + k, j * n + l);
                    m[(r, c)] = s.eval_letters(&[Letter::ustar(i + 1, j + 1), Letter::u(k + 1, l + 1)])?;
                    m_rev[(r, c)] = s.eval_letters(&[Letter::u(i + 1, j + 1), Letter::ustar(k + 1, l + 1)])?;
                }
            }
        }
    }
    Ok(MomentMatrices { n: nm, nbar, m, m_rev })
}

#[derive(Clone, Debug, Serialize)]
pub struct TracialityReport {
    pub tracial: bool,
    pub words_checked: usize,
    pub max_defect: f64,
    /// (v, w) with the largest |s(vw) − s(wv)|.
    pub worst: Option<(String, String)>,
}

/// Word count above which [`is_tracial`] checks an evenly strided sample.
pub const TRACIAL_EXHAUSTIVE_LIMIT: usize = 300_000;

/// Checks s(vw) = s(wv) for all splits of all words up to `max_len`.
pub fn is_tracial(s: &dyn StateEvaluator, max_len: usize, tol: f64) -> Result<TracialityReport> {
    let n = s.dim();
    let k = 2 * n * n;
    let total: usize = (0..=max_len).map(|l| k.pow(l as u32)).sum();
    let stride = total.div_ceil(TRACIAL_EXHAUSTIVE_LIMIT).max(1);
    let words: Vec<Word> = crate::brown_words::words_up_to(n, max_len)
        .into_iter()
        .step_by(stride)
        .collect();
    let mut max_defect: f64 = 0.0;
    let mut worst = None;
    for w in &words {
        let letters = w.letters();
        if letters.len() < 2 {
            continue;
        }
        let base = s.eval_letters(letters)?;
        let mut rotated = letters.to_vec();
        for cut in 1..letters.len() {
            rotated.rotate_left(1);
            let d = (s.eval_letters(&rotated)? - base).norm();
            if d > max_defect {
                max_defect = d;
                let v = Word::new(n, letters[..cut].to_vec())?;
                let rest = Word::new(n, letters[cut..].to_vec())?;
                worst = Some((v.to_string(), rest.to_string()));
            }
        }
    }
    Ok(TracialityReport {
        tracial: max_defect <= tol,
        words_checked: words.len(),
        max_defect,
        worst,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub size: usize,
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub positive: bool,
}

/// G_ab = s(w_a* w_b); Hermitian within tol and min eigenvalue ≥ −tol.
pub fn gram_psd_check(s: &dyn StateEvaluator, words: &[Word], tol: f64) -> Result<GramReport> {
    let k = words.len();
    let adjoints: Vec<Word> = words.iter().map(adjoint).collect();
    let mut g = ComplexMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            g[(a, b)] = s.eval(&adjoints[a].concat(&words[b])?)?;
        }
    }
    let hermitian_deviation = g.hermitian_deviation();
    let min_eigenvalue = if k == 0 { 0.0 } else { eigh_jacobi(&g)?.values[0] };
    Ok(GramReport {
        size: k,
        hermitian_deviation,
        min_eigenvalue,
        positive: hermitian_deviation <= tol && min_eigenvalue >= -tol,
    })
}

/// `{"n":2,"re":[[..]],"im":[[..]]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            n: m.rows(),
            re: m.re_parts(),
            im: m.im_parts(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let m = ComplexMatrix::from_parts(&self.re, &self.im)?;
        if m.rows() != self.n || m.cols() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: m.rows(),
            });
        }
        Ok(m)
    }
}

/// Parses and validates a unitary in the [`MatrixJson`] format.
pub fn load_unitary_json(text: &str) -> Result<ComplexMatrix> {
    let parsed: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    let m = parsed.to_matrix()?;
    require_unitary(&m)?;
    Ok(m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixtureAtomJson {
    pub weight: f64,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// `{"n":2,"atoms":[{"weight":0.5,"re":..,"im":..}, ..]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixtureJson {
    pub n: usize,
    pub atoms: Vec<MixtureAtomJson>,
}

pub fn load_mixture_json(text: &str) -> Result<FiniteMeasureState> {
    let parsed: MixtureJson = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    let mut atoms = Vec::with_capacity(parsed.atoms.len());
    for a in &parsed.atoms {
        let m = ComplexMatrix::from_parts(&a.re, &a.im)?;
        if m.rows() != parsed.n {
            return Err(Error::DimensionMismatch {
                expected: parsed.n,
                got: m.rows(),
            });
        }
        atoms.push((a.weight, m));
    }
    FiniteMeasureState::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brown_words::words_up_to;
    use crate::linalg::I;

    fn w(n: usize, s: &str) -> Word {
        Word::parse(n, s).unwrap()
    }

    fn rotation(theta: f64) -> ComplexMatrix {
        let (c, s) = (theta.cos(), theta.sin());
        ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => C64::new(c, 0.0),
            (0, 1) => C64::new(-s, 0.0),
            _ => C64::new(s, 0.0),
        })
    }

    #[test]
    fn character_values() {
        let id = CharacterState::counit(2);
        assert_eq!(id.eval(&w(2, "u11 u22*")).unwrap(), ONE);
        assert_eq!(id.eval(&w(2, "u12")).unwrap(), ZERO);
        let v = ComplexMatrix::diagonal(&[I, ONE]);
        let c = CharacterState::new(v).unwrap();
        assert_eq!(c.eval(&w(2, "u11*")).unwrap(), -I);
        assert!(CharacterState::new(ComplexMatrix::diagonal(&[ONE, ONE * 2.0])).is_err());
    }

    #[test]
    fn mixture_and_moment_matrices() {
        let phi1 = FiniteMeasureState::new(vec![
            (0.5, ComplexMatrix::identity(2)),
            (0.5, ComplexMatrix::identity(2).scale(-ONE)),
        ])
        .unwrap();
        let mm = moment_matrices(&phi1).unwrap();
        assert_eq!(mm.n.max_abs(), 0.0);
        assert_eq!(mm.m, ComplexMatrix::identity(4));
        let a = ComplexMatrix::diagonal(&[I, ONE]);
        let phi2 = FiniteMeasureState::new(vec![(0.5, a.clone()), (0.5, a.conj())]).unwrap();
        let mm = moment_matrices(&phi2).unwrap();
        // entry ((1,2),(1,2)) = φ2(u*_11 u_22) = ½(−i + i) = 0
        assert!(mm.m[(1, 1)].norm() < 1e-15);
        assert!(FiniteMeasureState::new(vec![(0.7, ComplexMatrix::identity(2))]).is_err());
    }

    #[test]
    fn rep_vector_state_uses_adjoint_blocks() {
        let m = rotation(0.3).kron(&rotation(1.1));
        let s = RepVectorState::new(2, 2, &m, 1).unwrap();
        let x = s.eval(&w(2, "u12 u12*")).unwrap();
        let b = m.block(2, 0, 1);
        let direct = b.matmul(&b.adjoint())[(0, 0)];
        assert!((x - direct).norm() < 1e-14);
    }

    #[test]
    fn characters_are_tracial_and_positive() {
        let c = CharacterState::new(rotation(0.4)).unwrap();
        let r = is_tracial(&c, 3, 1e-12).unwrap();
        assert!(r.tracial, "{r:?}");
        let g = gram_psd_check(&c, &words_up_to(2, 2), HERMITIAN_TOL).unwrap();
        assert!(g.positive, "{g:?}");
    }

    #[test]
    fn generic_vector_state_is_not_tracial() {
        let m = rotation(0.3)
            .kron(&rotation(1.1))
            .matmul(&ComplexMatrix::from_fn(
                4,
                4,
                |i, j| {
                    if (i + 1) % 4 == j {
                        ONE
                    } else {
                        ZERO
                    }
                },
            ));
        let s = RepVectorState::new(2, 2, &m, 1).unwrap();
        assert!(!is_tracial(&s, 2, 1e-9).unwrap().tracial);
        let g = gram_psd_check(&s, &words_up_to(2, 2), HERMITIAN_TOL).unwrap();
        assert!(g.positive, "{g:?}");
    }

    #[test]
    fn json_roundtrip() {
        let m = rotation(0.7);
        let text = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        assert_eq!(load_unitary_json(&text).unwrap(), m);
        assert!(load_unitary_json(r#"{"n":2,"re":[[1,0],[0,2]],"im":[[0,0],[0,0]]}"#).is_err());
        assert!(load_unitary_json(r#"{"n":3,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#).is_err());
    }
}
