//! The five universal products of states on U⟨n⟩ ⊔ U⟨n⟩ and the
//! convolutions (φ ⋆ ψ) = (φ · ψ) ∘ Δ built from them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use crate::brown_words::{coproduct, BiLetter, BiWord, Leg, Letter, Word, WordPoly};
use crate::error::{check_capacity, Error, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::noncrossing::{moments_from_cumulants, CumulantTable};
use crate::states::{SharedState, StateEvaluator};

pub const PRODUCT_LENGTH_LIMIT: usize = 10;
pub const ORACLE_LENGTH_LIMIT: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProductKind {
    Free,
    Tensor,
    Boolean,
    Monotone,
    AntiMonotone,
}

impl ProductKind {
    pub const ALL: [ProductKind; 5] = [
        ProductKind::Free,
        ProductKind::Tensor,
        ProductKind::Boolean,
        ProductKind::Monotone,
        ProductKind::AntiMonotone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProductKind::Free => "free",
            ProductKind::Tensor => "tensor",
            ProductKind::Boolean => "boolean",
            ProductKind::Monotone => "monotone",
            ProductKind::AntiMonotone => "antimonotone",
        }
    }
}

impl fmt::Display for ProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProductKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Self::Free),
            "tensor" => Ok(Self::Tensor),
            "boolean" => Ok(Self::Boolean),
            "monotone" => Ok(Self::Monotone),
            "antimonotone" | "anti-monotone" => Ok(Self::AntiMonotone),
            other => Err(Error::Invalid(format!("unknown product kind {other:?}"))),
        }
    }
}

/// A polynomial living entirely in one leg.
#[derive(Clone, Debug, PartialEq)]
pub struct LegPoly {
    pub leg: Leg,
    pub poly: WordPoly,
}

type Monomial = (Leg, Vec<Letter>);

fn merge_monomials(bw: &[BiLetter]) -> Vec<Monomial> {
    let mut out: Vec<Monomial> = Vec::new();
    for b in bw {
        match out.last_mut() {
            Some((leg, letters)) if *leg == b.leg => letters.push(b.letter),
            _ => out.push((b.leg, vec![b.letter])),
        }
    }
    out
}

/// Groups maximal runs of same-leg letters into single leg elements, so the
/// result alternates between legs.
pub fn merge_adjacent(bw: &BiWord) -> Vec<LegPoly> {
    merge_monomials(&bw.letters)
        .into_iter()
        .map(|(leg, letters)| LegPoly {
            leg,
            poly: WordPoly::from_word(&Word::from_parts_unchecked(bw.n, letters), ONE),
        })
        .collect()
}

fn monomial_counit(letters: &[Letter]) -> bool {
    letters.iter().all(|l| l.row == l.col)
}

/// Memo of leg values and of free-product values on alternating words.
#[derive(Default)]
pub struct ProductCache {
    leg: Mutex<HashMap<Monomial, C64>>,
    free: Mutex<HashMap<Vec<Monomial>, C64>>,
}

/// Evaluates one product of two leg states.
pub struct ProductEvaluator<'a> {
    kind: ProductKind,
    left: &'a dyn StateEvaluator,
    right: &'a dyn StateEvaluator,
    cache: &'a ProductCache,
}

impl<'a> ProductEvaluator<'a> {
    pub fn new(
        kind: ProductKind,
        left: &'a dyn StateEvaluator,
        right: &'a dyn StateEvaluator,
        cache: &'a ProductCache,
    ) -> Result<Self> {
        if left.dim() != right.dim() {
            return Err(Error::DimensionMismatch {
                expected: left.dim(),
                got: right.dim(),
            });
        }
        Ok(Self {
            kind,
            left,
            right,
            cache,
        })
    }

    pub fn dim(&self) -> usize {
        self.left.dim()
    }

    fn leg_value(&self, leg: Leg, letters: &[Letter]) -> Result<C64> {
        if letters.is_empty() {
            return Ok(ONE);
        }
        let key = (leg, letters.to_vec());
        if let Some(v) = self.cache.leg.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = match leg {
            Leg::One => self.left.eval_letters(letters)?,
            Leg::Two => self.right.eval_letters(letters)?,
        };
        self.cache.leg.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }

    pub fn eval(&self, bw: &BiWord) -> Result<C64> {
        check_capacity("bi-word length", bw.letters.len(), PRODUCT_LENGTH_LIMIT)?;
        if bw.n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: bw.n,
            });
        }
        let blocks = merge_monomials(&bw.letters);
        match self.kind {
            ProductKind::Tensor => {
                let one = bw.leg_word(Leg::One);
                let two = bw.leg_word(Leg::Two);
                Ok(self.leg_value(Leg::One, one.letters())? * self.leg_value(Leg::Two, two.letters())?)
            }
            ProductKind::Free => self.free(&blocks, 0),
            kind => self.counit_centered(kind, &blocks),
        }
    }

    /// Free product by state-centering. From φ(Π(a_i − λ_i)) = 0 for an
    /// alternating word of centered elements:
    /// φ(a_1⋯a_m) = Σ_{∅≠T} (−1)^{|T|+1} Π_{i∈T} λ_i · φ(Π_{i∉T} a_i),
    /// where removing letters re-merges neighbours on the same leg.
    fn free(&self, blocks: &[Monomial], depth: usize) -> Result<C64> {
        check_capacity("free product recursion depth", depth, 2 * PRODUCT_LENGTH_LIMIT)?;
        match blocks.len() {
            0 => return Ok(ONE),
            1 => return self.leg_value(blocks[0].0, &blocks[0].1),
            _ => {}
        }
        if let Some(v) = self.cache.free.lock().expect("cache lock").get(blocks) {
            return Ok(*v);
        }
        let m = blocks.len();
        let lambdas: Vec<C64> = blocks
            .iter()
            .map(|(leg, l)| self.leg_value(*leg, l))
            .collect::<Result<_>>()?;
        let mut total = ZERO;
        for t in 1u32..(1 << m) {
            let mut coeff = if t.count_ones() % 2 == 1 { ONE } else { -ONE };
            for (i, lam) in lambdas.iter().enumerate() {
                if t & (1 << i) != 0 {
                    coeff *= lam;
                }
            }
            if coeff == ZERO {
                continue;
            }
            let rest: Vec<BiLetter> = blocks
                .iter()
                .enumerate()
                .filter(|(i, _)| t & (1 << i) == 0)
                .flat_map(|(_, (leg, letters))| letters.iter().map(|&letter| BiLetter { leg: *leg, letter }))
                .collect();
            total += coeff * self.free(&merge_monomials(&rest), depth + 1)?;
        }
        self.cache
            .free
            .lock()
            .expect("cache lock")
            .insert(blocks.to_vec(), total);
        Ok(total)
    }

    /// φ_leg(Π_{i∈idx}(a_i − δ(a_i))) by expanding the product.
    fn centered_value(&self, leg: Leg, blocks: &[Monomial], idx: &[usize]) -> Result<C64> {
        let k = idx.len();
        let deltas: Vec<bool> = idx.iter().map(|&i| monomial_counit(&blocks[i].1)).collect();
        let forced: u32 = (0..k).filter(|&p| !deltas[p]).fold(0, |acc, p| acc | (1 << p));
        let mut total = ZERO;
        let mut letters = Vec::new();
        for keep in 0u32..(1 << k) {
            if keep & forced != forced {
                continue;
            }
            letters.clear();
            for (p, &i) in idx.iter().enumerate() {
                if keep & (1 << p) != 0 {
                    letters.extend_from_slice(&blocks[i].1);
                }
            }
            let dropped = k as u32 - keep.count_ones();
            let sign = if dropped % 2 == 0 { ONE } else { -ONE };
            total += sign * self.leg_value(leg, &letters)?;
        }
        Ok(total)
    }

    /// Boolean, monotone and anti-monotone products: center every element
    /// with the counit, a_i = δ(a_i)1 + a_i°. Products of counit-centered
    /// elements stay centered, so each subset S of kept positions gives an
    /// alternating word of centered elements on which the product is defined
    /// directly.
    fn counit_centered(&self, kind: ProductKind, blocks: &[Monomial]) -> Result<C64> {
        let m = blocks.len();
        let deltas: Vec<bool> = blocks.iter().map(|(_, l)| monomial_counit(l)).collect();
        let forced: u32 = (0..m).filter(|&i| !deltas[i]).fold(0, |acc, i| acc | (1 << i));
        let mut total = ZERO;
        for s in 0u32..(1 << m) {
            if s & forced != forced {
                continue;
            }
            let kept: Vec<usize> = (0..m).filter(|&i| s & (1 << i) != 0).collect();
            let mut runs: Vec<(Leg, Vec<usize>)> = Vec::new();
            for &i in &kept {
                match runs.last_mut() {
                    Some((leg, idx)) if *leg == blocks[i].0 => idx.push(i),
                    _ => runs.push((blocks[i].0, vec![i])),
                }
            }
            let whole = |leg: Leg| -> Vec<usize> { kept.iter().copied().filter(|&i| blocks[i].0 == leg).collect() };
            let value = match kind {
                ProductKind::Boolean => {
                    let mut acc = ONE;
                    for (leg, idx) in &runs {
                        acc *= self.centered_value(*leg, blocks, idx)?;
                        if acc == ZERO {
                            break;
                        }
                    }
                    acc
                }
                ProductKind::Monotone => {
                    let mut acc = self.centered_value(Leg::One, blocks, &whole(Leg::One))?;
                    for (leg, idx) in runs.iter().filter(|(leg, _)| *leg == Leg::Two) {
                        if acc == ZERO {
                            break;
                        }
                        acc *= self.centered_value(*leg, blocks, idx)?;
                    }
                    acc
                }
                ProductKind::AntiMonotone => {
                    let mut acc = self.centered_value(Leg::Two, blocks, &whole(Leg::Two))?;
                    for (leg, idx) in runs.iter().filter(|(leg, _)| *leg == Leg::One) {
                        if acc == ZERO {
                            break;
                        }
                        acc *= self.centered_value(*leg, blocks, idx)?;
                    }
                    acc
                }
                ProductKind::Free | ProductKind::Tensor => unreachable!("handled elsewhere"),
            };
            total += value;
        }
        Ok(total)
    }
}

/// (φ1 · φ2)(bw) for the given universal product.
pub fn eval_product_state(
    kind: ProductKind,
    phi1: &dyn StateEvaluator,
    phi2: &dyn StateEvaluator,
    bw: &BiWord,
) -> Result<C64> {
    let cache = ProductCache::default();
    ProductEvaluator::new(kind, phi1, phi2, &cache)?.eval(bw)
}

/// Free product via free cumulants: Σ over non-crossing partitions of the
/// letter positions whose blocks stay inside one leg, of products of that
/// leg's cumulants.
pub fn eval_free_product_oracle(phi1: &dyn StateEvaluator, phi2: &dyn StateEvaluator, bw: &BiWord) -> Result<C64> {
    check_capacity("oracle bi-word length", bw.letters.len(), ORACLE_LENGTH_LIMIT)?;
    let mut tables = Vec::new();
    for (leg, state) in [(Leg::One, phi1), (Leg::Two, phi2)] {
        let letters: Vec<Letter> = bw.letters.iter().filter(|b| b.leg == leg).map(|b| b.letter).collect();
        tables.push((leg, letters, state));
    }
    let mut errors = Vec::new();
    let (one, two) = tables.split_at(1);
    let mut t1 = CumulantTable::new(&one[0].1, |l: &[Letter]| {
        one[0].2.eval_letters(l).unwrap_or_else(|e| {
            errors.push(e);
            ZERO
        })
    })?;
    let mut errors2 = Vec::new();
    let mut t2 = CumulantTable::new(&two[0].1, |l: &[Letter]| {
        two[0].2.eval_letters(l).unwrap_or_else(|e| {
            errors2.push(e);
            ZERO
        })
    })?;
    // position of each bi-letter inside its own leg
    let mut leg_pos = Vec::with_capacity(bw.letters.len());
    let (mut c1, mut c2) = (0usize, 0usize);
    for b in &bw.letters {
        match b.leg {
            Leg::One => {
                leg_pos.push(c1);
                c1 += 1;
            }
            Leg::Two => {
                leg_pos.push(c2);
                c2 += 1;
            }
        }
    }
    let indexed: Vec<(Leg, usize)> = bw.letters.iter().zip(&leg_pos).map(|(b, &p)| (b.leg, p)).collect();
    let value = moments_from_cumulants(
        |block: &[(Leg, usize)]| {
            let leg = block[0].0;
            if block.iter().any(|(l, _)| *l != leg) {
                return ZERO;
            }
            let mask = block.iter().fold(0u32, |acc, (_, p)| acc | (1 << p));
            match leg {
                Leg::One => t1.kappa(mask),
                Leg::Two => t2.kappa(mask),
            }
        },
        &indexed,
    )?;
    drop(t1);
    drop(t2);
    if let Some(e) = errors.into_iter().chain(errors2).next() {
        return Err(e);
    }
    Ok(value)
}

pub const CONVOLVE_LENGTH_LIMIT: usize = PRODUCT_LENGTH_LIMIT / 2;

/// The state (φ ⋆_kind ψ) = (φ ·_kind ψ) ∘ Δ. Owns a memo of product
/// values, so repeated evaluations on related words are cheap.
pub struct ConvolutionState {
    kind: ProductKind,
    left: SharedState,
    right: SharedState,
    cache: ProductCache,
}

impl ConvolutionState {
    pub fn kind(&self) -> ProductKind {
        self.kind
    }
}

pub fn convolve(kind: ProductKind, phi: SharedState, psi: SharedState) -> Result<ConvolutionState> {
    if phi.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.dim(),
            got: psi.dim(),
        });
    }
    Ok(ConvolutionState {
        kind,
        left: phi,
        right: psi,
        cache: ProductCache::default(),
    })
}

impl StateEvaluator for ConvolutionState {
    fn dim(&self) -> usize {
        self.left.dim()
    }

    fn eval_letters(&self, letters: &[Letter]) -> Result<C64> {
        check_capacity("convolution word length", letters.len(), CONVOLVE_LENGTH_LIMIT)?;
        let w = Word::new(self.dim(), letters.to_vec())?;
        let ev = ProductEvaluator::new(self.kind, self.left.as_ref(), self.right.as_ref(), &self.cache)?;
        let mut total = ZERO;
        for bw in coproduct(&w)? {
            total += ev.eval(&bw)?;
        }
        Ok(total)
    }

    fn label(&self) -> String {
        format!("({} ⋆{} {})", self.left.label(), self.kind, self.right.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brown_words::words_up_to;
    use crate::haar_traces::FreeHaarTrace;
    use crate::linalg::ComplexMatrix;
    use crate::states::CharacterState;
    use std::sync::Arc;

    fn bi(n: usize, spec: &[(u8, Letter)]) -> BiWord {
        BiWord {
            n,
            letters: spec
                .iter()
                .map(|&(leg, letter)| BiLetter {
                    leg: if leg == 1 { Leg::One } else { Leg::Two },
                    letter,
                })
                .collect(),
        }
    }

    fn rot(theta: f64, phase: f64) -> ComplexMatrix {
        let (c, s) = (theta.cos(), theta.sin());
        let p = C64::from_polar(1.0, phase);
        ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(c, 0.0),
            (0, 1) => C64::new(-s, 0.0) * p,
            (1, 0) => C64::new(s, 0.0),
            _ => C64::new(c, 0.0) * p,
        })
    }

    #[test]
    fn merge_alternates() {
        let b = bi(
            2,
            &[
                (1, Letter::u(1, 1)),
                (1, Letter::u(1, 2)),
                (2, Letter::u(2, 2)),
                (1, Letter::u(1, 1)),
            ],
        );
        let m = merge_adjacent(&b);
        assert_eq!(m.len(), 3);
        assert_eq!(m[0].leg, Leg::One);
        assert_eq!(m[0].poly.terms().next().unwrap().0.len(), 2);
    }

    #[test]
    fn free_pattern_aba() {
        // φ(a b c) = φ(ac) φ(b) for a, c in leg 1 and b in leg 2
        let x = CharacterState::new(rot(0.3, 0.2)).unwrap();
        let y = CharacterState::new(rot(1.2, -0.7)).unwrap();
        let a = Letter::u(1, 2);
        let b = Letter::ustar(2, 1);
        let c = Letter::u(2, 2);
        let v = eval_product_state(ProductKind::Free, &x, &y, &bi(2, &[(1, a), (2, b), (1, c)])).unwrap();
        let expect = x.eval_letters(&[a, c]).unwrap() * y.eval_letters(&[b]).unwrap();
        assert!((v - expect).norm() < 1e-14);
    }

    #[test]
    fn boolean_pattern_aba() {
        // (φ ◇ ψ)(abc) = φ(a)(ψ(b) − δ(b))φ(c) + δ(b)φ(ac)
        let x = CharacterState::new(rot(0.3, 0.2)).unwrap();
        let y = CharacterState::new(rot(1.2, -0.7)).unwrap();
        let a = Letter::u(1, 2);
        let b = Letter::ustar(2, 2);
        let c = Letter::u(2, 1);
        let v = eval_product_state(ProductKind::Boolean, &x, &y, &bi(2, &[(1, a), (2, b), (1, c)])).unwrap();
        let fa = x.eval_letters(&[a]).unwrap();
        let fc = x.eval_letters(&[c]).unwrap();
        let expect = fa * (y.eval_letters(&[b]).unwrap() - ONE) * fc + x.eval_letters(&[a, c]).unwrap();
        assert!((v - expect).norm() < 1e-14);
    }

    #[test]
    fn counit_is_neutral_for_every_kind() {
        let delta: SharedState = Arc::new(CharacterState::counit(2));
        let phi: SharedState = Arc::new(CharacterState::new(rot(0.9, 0.4)).unwrap());
        for kind in ProductKind::ALL {
            let left = convolve(kind, delta.clone(), phi.clone()).unwrap();
            let right = convolve(kind, phi.clone(), delta.clone()).unwrap();
            for w in words_up_to(2, 3) {
                let target = phi.eval(&w).unwrap();
                assert!((left.eval(&w).unwrap() - target).norm() < 1e-12, "{kind} {w}");
                assert!((right.eval(&w).unwrap() - target).norm() < 1e-12, "{kind} {w}");
            }
        }
    }

    #[test]
    fn characters_multiply_under_free_convolution() {
        let v = rot(0.5, 0.1);
        let w = rot(-1.3, 2.0);
        let left: SharedState = Arc::new(CharacterState::new(v.clone()).unwrap());
        let right: SharedState = Arc::new(CharacterState::new(w.clone()).unwrap());
        let prod = CharacterState::new(v.matmul(&w)).unwrap();
        let conv = convolve(ProductKind::Free, left, right).unwrap();
        for word in words_up_to(2, 3) {
            let a = conv.eval(&word).unwrap();
            let b = prod.eval(&word).unwrap();
            assert!((a - b).norm() < 1e-12, "{word}: {a} vs {b}");
        }
    }

    #[test]
    fn counit_convolutions_on_off_diagonal_generator() {
        let delta: SharedState = Arc::new(CharacterState::counit(2));
        let w = Word::parse(2, "u12").unwrap();
        for kind in ProductKind::ALL {
            let c = convolve(kind, delta.clone(), delta.clone()).unwrap();
            assert_eq!(c.eval(&w).unwrap(), ZERO);
        }
    }

    #[test]
    fn oracle_agrees_on_small_words() {
        let x = CharacterState::new(rot(0.3, 0.2)).unwrap();
        let h = FreeHaarTrace::new(2);
        let letters = [
            Letter::u(1, 2),
            Letter::ustar(1, 1),
            Letter::u(2, 1),
            Letter::ustar(1, 2),
        ];
        let b = bi(
            2,
            &[
                (1, letters[0]),
                (2, letters[1]),
                (1, letters[2]),
                (2, letters[3]),
                (2, letters[0]),
            ],
        );
        let r = eval_product_state(ProductKind::Free, &x, &h, &b).unwrap();
        let o = eval_free_product_oracle(&x, &h, &b).unwrap();
        assert!((r - o).norm() < 1e-13, "{r} vs {o}");
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in ProductKind::ALL {
            assert_eq!(k.name().parse::<ProductKind>().unwrap(), k);
        }
        assert!("semi".parse::<ProductKind>().is_err());
    }
}
