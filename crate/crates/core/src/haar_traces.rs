//! Exact evaluation of the free and tensor Haar traces on words.
//!
//! The free trace is a ↦ n(τ∗tr_n)(j_U(a)) for a Haar unitary U free from
//! the matrix units: a sum over non-crossing partitions of cyclic block
//! cumulants. The tensor trace factorizes over the level sets S_k of the
//! star pattern, each contributing a chain of Kronecker deltas.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::brown_words::{Letter, Word};
use crate::error::{check_capacity, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::noncrossing::{catalan, cumulants_from_moments, moments_from_cumulants};
use crate::states::StateEvaluator;

pub const FREE_LENGTH_LIMIT: usize = 12;
pub const TENSOR_LENGTH_LIMIT: usize = 16;

/// A letter after the substitution u*_ij → (U*)_ji: `i`, `j` index the
/// entry of U or U*, `star` says which.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConvertedLetter {
    pub i: usize,
    pub j: usize,
    pub star: bool,
}

impl From<Letter> for ConvertedLetter {
    fn from(l: Letter) -> Self {
        if l.star {
            Self {
                i: l.col,
                j: l.row,
                star: true,
            }
        } else {
            Self {
                i: l.row,
                j: l.col,
                star: false,
            }
        }
    }
}

pub fn convert(w: &[Letter]) -> Vec<ConvertedLetter> {
    w.iter().map(|&l| l.into()).collect()
}

/// j_{l−1} = i_l inside the block and i_first = j_last.
pub fn is_cyclic(block: &[ConvertedLetter]) -> bool {
    match (block.first(), block.last()) {
        (Some(f), Some(l)) => f.i == l.j && block.windows(2).all(|p| p[0].j == p[1].i),
        _ => false,
    }
}

/// n^{1−r}(−1)^{r/2−1}C_{r/2−1} for an even, alternating, cyclic block;
/// 0 otherwise.
pub fn free_haar_block_cumulant(n: usize, block: &[ConvertedLetter]) -> C64 {
    let r = block.len();
    if r == 0 || r % 2 == 1 || block.windows(2).any(|p| p[0].star == p[1].star) || !is_cyclic(block) {
        return ZERO;
    }
    let k = r / 2 - 1;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    C64::new(sign * catalan(k) as f64 * (n as f64).powi(1 - r as i32), 0.0)
}

pub fn free_haar_letters(n: usize, letters: &[Letter]) -> Result<C64> {
    check_capacity("free Haar word length", letters.len(), FREE_LENGTH_LIMIT)?;
    let conv = convert(letters);
    moments_from_cumulants(|b: &[ConvertedLetter]| free_haar_block_cumulant(n, b), &conv)
}

pub fn eval_free_haar(w: &Word) -> Result<C64> {
    free_haar_letters(w.dim(), w.letters())
}

/// S_k = {l : k = #{m>l : ε_m = ∅} − #{m≥l : ε_m = *}} for every k that
/// occurs, positions 0-based.
pub fn tensor_level_sets(stars: &[bool]) -> BTreeMap<i64, Vec<usize>> {
    let mut out: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut level: i64 = 0;
    let mut levels = vec![0i64; stars.len()];
    for (l, &s) in stars.iter().enumerate().rev() {
        if s {
            level -= 1;
            levels[l] = level;
        } else {
            levels[l] = level;
            level += 1;
        }
    }
    for (l, &k) in levels.iter().enumerate() {
        out.entry(k).or_default().push(l);
    }
    out
}

/// Tensor Haar value of an alternating word of even length r:
/// starting with u it is (1/n)·δ_{i1i2}δ_{j2j3}δ_{i3i4}…δ_{i(r−1)ir}δ_{jrj1};
/// starting with u* the roles of i and j swap.
pub fn alternating_value(n: usize, letters: &[Letter]) -> C64 {
    let r = letters.len();
    if r == 0 {
        return ONE;
    }
    if r % 2 == 1 || letters.windows(2).any(|p| p[0].star == p[1].star) {
        return ZERO;
    }
    let starts_starred = letters[0].star;
    let same = |a: &Letter, b: &Letter, rows: bool| if rows { a.row == b.row } else { a.col == b.col };
    for p in 0..r - 1 {
        // p even (1-based odd): rows when starting with u
        let rows = (p % 2 == 0) != starts_starred;
        if !same(&letters[p], &letters[p + 1], rows) {
            return ZERO;
        }
    }
    if !same(&letters[r - 1], &letters[0], starts_starred) {
        return ZERO;
    }
    C64::new(1.0 / n as f64, 0.0)
}

pub fn tensor_haar_letters(n: usize, letters: &[Letter]) -> Result<C64> {
    check_capacity("tensor Haar word length", letters.len(), TENSOR_LENGTH_LIMIT)?;
    let stars: Vec<bool> = letters.iter().map(|l| l.star).collect();
    let starred = stars.iter().filter(|&&s| s).count();
    if 2 * starred != letters.len() {
        return Ok(ZERO);
    }
    let mut acc = ONE;
    for positions in tensor_level_sets(&stars).values() {
        let sub: Vec<Letter> = positions.iter().map(|&p| letters[p]).collect();
        acc *= alternating_value(n, &sub);
        if acc == ZERO {
            break;
        }
    }
    Ok(acc)
}

pub fn eval_tensor_haar(w: &Word) -> Result<C64> {
    tensor_haar_letters(w.dim(), w.letters())
}

/// Independent evaluation in a model ⊗_{k∈ℤ} M_n with normalized trace:
/// letters act right to left; u_ij multiplies the factor at the current
/// level by E_ji and moves up, u*_ij moves down and multiplies that factor
/// by E_ij. Factors that are never touched contribute tr(I) = 1.
pub fn tensor_haar_oracle_letters(n: usize, letters: &[Letter]) -> Result<C64> {
    check_capacity("tensor Haar word length", letters.len(), TENSOR_LENGTH_LIMIT)?;
    let r = letters.len() as i64;
    let span = (2 * r + 1) as usize;
    let mut slots: Vec<Option<Vec<f64>>> = vec![None; span];
    let mut level: i64 = 0;
    for l in letters.iter().rev() {
        let (a, b) = if l.star {
            level -= 1;
            (l.row - 1, l.col - 1)
        } else {
            (l.col - 1, l.row - 1)
        };
        let slot = slots[(level + r) as usize].get_or_insert_with(|| {
            let mut id = vec![0.0; n * n];
            for i in 0..n {
                id[i * n + i] = 1.0;
            }
            id
        });
        // E_ab X keeps row b of X, moved to row a
        let row_b: Vec<f64> = slot[b * n..(b + 1) * n].to_vec();
        slot.iter_mut().for_each(|x| *x = 0.0);
        slot[a * n..(a + 1) * n].copy_from_slice(&row_b);
        if !l.star {
            level += 1;
        }
    }
    if level != 0 {
        return Ok(ZERO);
    }
    let mut acc = 1.0;
    for slot in slots.iter().flatten() {
        let tr: f64 = (0..n).map(|i| slot[i * n + i]).sum::<f64>() / n as f64;
        acc *= tr;
    }
    Ok(C64::new(acc, 0.0))
}

pub fn eval_tensor_haar_oracle(w: &Word) -> Result<C64> {
    tensor_haar_oracle_letters(w.dim(), w.letters())
}

#[derive(Clone, Copy, Debug)]
pub struct FreeHaarTrace {
    n: usize,
}

impl FreeHaarTrace {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl StateEvaluator for FreeHaarTrace {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval_letters(&self, letters: &[Letter]) -> Result<C64> {
        free_haar_letters(self.n, letters)
    }
    fn label(&self) -> String {
        "haar-free".into()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TensorHaarTrace {
    n: usize,
}

impl TensorHaarTrace {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl StateEvaluator for TensorHaarTrace {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval_letters(&self, letters: &[Letter]) -> Result<C64> {
        tensor_haar_letters(self.n, letters)
    }
    fn label(&self) -> String {
        "haar-tensor".into()
    }
}

pub type MomentSequence = Arc<dyn Fn(u64) -> C64 + Send + Sync>;

/// a ↦ n(τ∗tr_n)(j_U(a)) for a unitary U, free from the matrix units, whose
/// moments τ(U^k), k ≥ 0, are given. Block cumulants of cyclic blocks are
/// n^{1−q}κ_q(U^{ε1}, …, U^{εq}); the κ_q come from the moment–cumulant
/// inversion. With τ(U^k) = δ_k0 this is the free Haar trace.
pub struct CompressedUnitaryState {
    n: usize,
    moments: MomentSequence,
    label: String,
    cumulants: Mutex<HashMap<Vec<bool>, C64>>,
}

impl CompressedUnitaryState {
    pub fn new(n: usize, label: impl Into<String>, moments: MomentSequence) -> Self {
        Self {
            n,
            moments,
            label: label.into(),
            cumulants: Mutex::new(HashMap::new()),
        }
    }

    /// τ(U^{ε1}⋯U^{εq}) depends only on the net power.
    fn star_moment(&self, stars: &[bool]) -> C64 {
        let net: i64 = stars.iter().map(|&s| if s { -1 } else { 1 }).sum();
        let m = (self.moments)(net.unsigned_abs());
        if net < 0 {
            m.conj()
        } else {
            m
        }
    }

    fn star_cumulant(&self, stars: &[bool]) -> C64 {
        if let Some(v) = self.cumulants.lock().expect("cache lock").get(stars) {
            return *v;
        }
        let v = cumulants_from_moments(|s: &[bool]| self.star_moment(s), stars).expect("block length already guarded");
        self.cumulants.lock().expect("cache lock").insert(stars.to_vec(), v);
        v
    }
}

impl StateEvaluator for CompressedUnitaryState {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval_letters(&self, letters: &[Letter]) -> Result<C64> {
        check_capacity("free block word length", letters.len(), FREE_LENGTH_LIMIT)?;
        let conv = convert(letters);
        let n = self.n as f64;
        moments_from_cumulants(
            |b: &[ConvertedLetter]| {
                if !is_cyclic(b) {
                    return ZERO;
                }
                let stars: Vec<bool> = b.iter().map(|c| c.star).collect();
                self.star_cumulant(&stars) * n.powi(1 - b.len() as i32)
            },
            &conv,
        )
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brown_words::words_up_to;

    fn w(n: usize, s: &str) -> Word {
        Word::parse(n, s).unwrap()
    }

    #[test]
    fn conversion_examples() {
        assert_eq!(
            ConvertedLetter::from(Letter::ustar(1, 2)),
            ConvertedLetter { i: 2, j: 1, star: true }
        );
        assert_eq!(
            ConvertedLetter::from(Letter::u(1, 2)),
            ConvertedLetter {
                i: 1,
                j: 2,
                star: false
            }
        );
    }

    #[test]
    fn block_cumulant_examples() {
        let b = [
            ConvertedLetter {
                i: 1,
                j: 2,
                star: false,
            },
            ConvertedLetter { i: 2, j: 1, star: true },
            ConvertedLetter {
                i: 1,
                j: 2,
                star: false,
            },
            ConvertedLetter { i: 2, j: 1, star: true },
        ];
        assert!((free_haar_block_cumulant(2, &b) - C64::new(-1.0 / 8.0, 0.0)).norm() < 1e-15);
        let single = [ConvertedLetter {
            i: 1,
            j: 1,
            star: false,
        }];
        assert_eq!(free_haar_block_cumulant(2, &single), ZERO);
        let broken = [
            ConvertedLetter {
                i: 1,
                j: 2,
                star: false,
            },
            ConvertedLetter { i: 1, j: 1, star: true },
        ];
        assert_eq!(free_haar_block_cumulant(2, &broken), ZERO);
    }

    #[test]
    fn free_examples() {
        assert!((eval_free_haar(&w(2, "u11 u11*")).unwrap() - 0.5).norm() < 1e-15);
        assert!((eval_free_haar(&w(2, "u11 u11* u11 u11*")).unwrap() - 0.375).norm() < 1e-15);
        assert_eq!(eval_free_haar(&w(1, "u11 u11 u11")).unwrap(), ZERO);
        assert_eq!(eval_free_haar(&w(1, "")).unwrap(), ONE);
        let long = Word::new(1, vec![Letter::u(1, 1); 13]).unwrap();
        assert!(eval_free_haar(&long).is_err());
    }

    #[test]
    fn tensor_examples() {
        assert!((eval_tensor_haar(&w(2, "u11 u11* u11 u11*")).unwrap() - 0.5).norm() < 1e-15);
        assert!((eval_tensor_haar_oracle(&w(2, "u11 u11* u11 u11*")).unwrap() - 0.5).norm() < 1e-15);
        assert_eq!(eval_tensor_haar(&w(2, "u11 u22*")).unwrap(), ZERO);
        assert_eq!(eval_tensor_haar(&w(2, "u11 u11")).unwrap(), ZERO);
        let sets = tensor_level_sets(&[false, false, true, true]);
        assert_eq!(sets[&-1], vec![0, 3]);
        assert_eq!(sets[&-2], vec![1, 2]);
    }

    #[test]
    fn compressed_haar_matches_free_haar() {
        let s = CompressedUnitaryState::new(2, "haar", Arc::new(|k| if k == 0 { ONE } else { ZERO }));
        for word in words_up_to(2, 4) {
            let a = s.eval(&word).unwrap();
            let b = eval_free_haar(&word).unwrap();
            assert!((a - b).norm() < 1e-12, "{word}: {a} vs {b}");
        }
    }
}
