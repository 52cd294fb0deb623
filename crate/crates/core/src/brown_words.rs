//! Words in the generators u_ij, u*_ij of the Brown algebra U⟨n⟩ and the
//! dual-group structure maps on them.
//!
//! Words are kept in the free *-algebra on the generators; the unitarity
//! relations are never used to rewrite them. Indices are 1-based.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_capacity, Error, Result};
use crate::linalg::{C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub row: usize,
    pub col: usize,
    pub star: bool,
}

impl Letter {
    pub const fn u(row: usize, col: usize) -> Self {
        Self { row, col, star: false }
    }

    pub const fn ustar(row: usize, col: usize) -> Self {
        Self { row, col, star: true }
    }

    /// u_ij ↦ u*_ij and back.
    pub const fn adjoint(self) -> Self {
        Self {
            star: !self.star,
            ..self
        }
    }

    /// u_ij ↦ u*_ji, u*_ij ↦ u_ji.
    pub const fn antipode(self) -> Self {
        Self {
            row: self.col,
            col: self.row,
            star: !self.star,
        }
    }

    pub fn counit(self) -> C64 {
        if self.row == self.col {
            ONE
        } else {
            ZERO
        }
    }

    fn check(self, n: usize) -> Result<()> {
        for index in [self.row, self.col] {
            if index == 0 || index > n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}{}{}", self.row, self.col, if self.star { "*" } else { "" })
    }
}

/// All 2n² generators: unstarred in row-major order, then starred.
pub fn alphabet(n: usize) -> Vec<Letter> {
    let mut out = Vec::with_capacity(2 * n * n);
    for star in [false, true] {
        for row in 1..=n {
            for col in 1..=n {
                out.push(Letter { row, col, star });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word {
    n: usize,
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(n: usize, letters: Vec<Letter>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("dimension must be at least 1".into()));
        }
        for l in &letters {
            l.check(n)?;
        }
        Ok(Self { n, letters })
    }

    pub fn unit(n: usize) -> Self {
        Self { n, letters: Vec::new() }
    }

    pub(crate) fn from_parts_unchecked(n: usize, letters: Vec<Letter>) -> Self {
        Self { n, letters }
    }

    /// Parses `u11 u12* u21`; the empty string is the unit.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        let bytes = text.as_bytes();
        let mut pos = 0;
        while pos < bytes.len() {
            if bytes[pos].is_ascii_whitespace() {
                pos += 1;
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            letters.push(parse_token(&text[start..pos], start)?);
        }
        for (l, off) in letters.iter().zip(token_offsets(text)) {
            l.check(n).map_err(|e| Error::Parse {
                position: off,
                message: e.to_string(),
            })?;
        }
        Self::new(n, letters)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Word { n: self.n, letters })
    }

    pub fn count_starred(&self) -> usize {
        self.letters.iter().filter(|l| l.star).count()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

fn token_offsets(text: &str) -> Vec<usize> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        if bytes[pos].is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        out.push(pos);
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
    }
    out
}

fn parse_token(tok: &str, offset: usize) -> Result<Letter> {
    let err = |at: usize, message: &str| Error::Parse {
        position: offset + at,
        message: format!("{message} in token {tok:?}"),
    };
    let b = tok.as_bytes();
    if b[0] != b'u' {
        return Err(err(0, "expected 'u'"));
    }
    let digit = |at: usize| -> Result<usize> {
        match b.get(at) {
            Some(c @ b'1'..=b'9') => Ok((c - b'0') as usize),
            _ => Err(err(at, "expected a digit 1-9")),
        }
    };
    let row = digit(1)?;
    let col = digit(2)?;
    let star = match &b[3..] {
        [] => false,
        [b'*'] => true,
        _ => return Err(err(3, "unexpected trailing characters")),
    };
    Ok(Letter { row, col, star })
}

/// All words of length exactly `len` over [`alphabet`], in lexicographic
/// order of letter indices.
pub fn words_of_length(n: usize, len: usize) -> Vec<Word> {
    let alpha = alphabet(n);
    let k = alpha.len();
    let total = k.pow(len as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; len];
    for _ in 0..total {
        out.push(Word {
            n,
            letters: idx.iter().map(|&i| alpha[i]).collect(),
        });
        for p in (0..len).rev() {
            idx[p] += 1;
            if idx[p] < k {
                break;
            }
            idx[p] = 0;
        }
    }
    out
}

/// All words of length at most `max_len`, shortest first.
pub fn words_up_to(n: usize, max_len: usize) -> Vec<Word> {
    (0..=max_len).flat_map(|l| words_of_length(n, l)).collect()
}

pub fn counit(w: &Word) -> C64 {
    w.letters.iter().fold(ONE, |acc, l| acc * l.counit())
}

/// Letterwise antipode; the order of letters is kept.
pub fn antipode(w: &Word) -> Word {
    Word {
        n: w.n,
        letters: w.letters.iter().map(|l| l.antipode()).collect(),
    }
}

/// The involution: reverse and flip stars.
pub fn adjoint(w: &Word) -> Word {
    Word {
        n: w.n,
        letters: w.letters.iter().rev().map(|l| l.adjoint()).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Leg {
    One,
    Two,
}

impl Leg {
    pub fn other(self) -> Leg {
        match self {
            Leg::One => Leg::Two,
            Leg::Two => Leg::One,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BiLetter {
    pub leg: Leg,
    pub letter: Letter,
}

impl fmt::Display for BiLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let leg = match self.leg {
            Leg::One => 1,
            Leg::Two => 2,
        };
        let l = self.letter;
        write!(f, "u{}{}{}({leg})", l.row, l.col, if l.star { "*" } else { "" })
    }
}

/// A word in the free product U⟨n⟩ ⊔ U⟨n⟩.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BiWord {
    pub n: usize,
    pub letters: Vec<BiLetter>,
}

impl fmt::Display for BiWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl BiWord {
    /// Letters of one leg, in order.
    pub fn leg_word(&self, leg: Leg) -> Word {
        Word {
            n: self.n,
            letters: self.letters.iter().filter(|b| b.leg == leg).map(|b| b.letter).collect(),
        }
    }
}

/// Upper bound on the number of terms [`coproduct`] will expand.
pub const COPRODUCT_TERM_LIMIT: usize = 1 << 22;

/// Δ(w) as a list of bi-words, each with coefficient 1. There are n^|w|
/// terms, enumerated with the summation indices in lexicographic order.
///
/// Δ(u_ij) = Σ_k u_ik⁽¹⁾ u_kj⁽²⁾ and Δ(u*_ij) = Σ_k u*_kj⁽²⁾ u*_ik⁽¹⁾.
pub fn coproduct(w: &Word) -> Result<Vec<BiWord>> {
    let n = w.n;
    let r = w.len();
    let total = (n as u128).pow(r as u32);
    check_capacity(
        "coproduct terms",
        total.min(usize::MAX as u128) as usize,
        COPRODUCT_TERM_LIMIT,
    )?;
    let total = total as usize;
    let mut out = Vec::with_capacity(total);
    let mut ks = vec![1usize; r];
    for _ in 0..total {
        let mut letters = Vec::with_capacity(2 * r);
        for (l, &k) in w.letters.iter().zip(&ks) {
            if l.star {
                letters.push(BiLetter {
                    leg: Leg::Two,
                    letter: Letter::ustar(k, l.col),
                });
                letters.push(BiLetter {
                    leg: Leg::One,
                    letter: Letter::ustar(l.row, k),
                });
            } else {
                letters.push(BiLetter {
                    leg: Leg::One,
                    letter: Letter::u(l.row, k),
                });
                letters.push(BiLetter {
                    leg: Leg::Two,
                    letter: Letter::u(k, l.col),
                });
            }
        }
        out.push(BiWord { n, letters });
        for p in (0..r).rev() {
            ks[p] += 1;
            if ks[p] <= n {
                break;
            }
            ks[p] = 1;
        }
    }
    Ok(out)
}

/// Swaps the two legs.
pub fn flip(bw: &BiWord) -> BiWord {
    BiWord {
        n: bw.n,
        letters: bw
            .letters
            .iter()
            .map(|b| BiLetter {
                leg: b.leg.other(),
                letter: b.letter,
            })
            .collect(),
    }
}

/// Finite linear combination of words. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct WordPoly {
    n: usize,
    terms: BTreeMap<Vec<Letter>, C64>,
}

impl WordPoly {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_word(w: &Word, coeff: C64) -> Self {
        let mut p = Self::zero(w.n);
        p.add_term(w.letters.clone(), coeff);
        p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, letters: Vec<Letter>, coeff: C64) {
        if coeff == ZERO {
            return;
        }
        let slot = self.terms.entry(letters).or_insert(ZERO);
        *slot += coeff;
        if *slot == ZERO {
            // remove exact cancellations
            self.terms.retain(|_, c| *c != ZERO);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, &c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::zero(self.n);
        for (w, &c) in &self.terms {
            out.add_term(w.clone(), c * s);
        }
        out
    }

    /// Product in the free algebra: concatenation.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let mut w = a.clone();
                w.extend_from_slice(b);
                out.add_term(w, ca * cb);
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (Word, C64)> + '_ {
        self.terms
            .iter()
            .map(|(l, &c)| (Word::from_parts_unchecked(self.n, l.clone()), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest coefficient modulus of self − other.
    pub fn distance(&self, other: &Self) -> f64 {
        self.add(&other.scale(-ONE))
            .terms
            .values()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// Applies a linear functional termwise.
    pub fn eval_with(&self, mut f: impl FnMut(&Word) -> Result<C64>) -> Result<C64> {
        let mut acc = ZERO;
        for (w, c) in self.terms() {
            acc += c * f(&w)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationSide {
    /// Σ_k u*_ki u_kj − δ_ij
    Left,
    /// Σ_k u_ik u*_jk − δ_ij
    Right,
}

pub fn unitarity_relation(n: usize, i: usize, j: usize, side: RelationSide) -> Result<WordPoly> {
    Letter::u(i, j).check(n)?;
    let mut p = WordPoly::zero(n);
    for k in 1..=n {
        let w = match side {
            RelationSide::Left => vec![Letter::ustar(k, i), Letter::u(k, j)],
            RelationSide::Right => vec![Letter::u(i, k), Letter::ustar(j, k)],
        };
        p.add_term(w, ONE);
    }
    if i == j {
        p.add_term(Vec::new(), -ONE);
    }
    Ok(p)
}

/// All 2n² relation polynomials.
pub fn all_unitarity_relations(n: usize) -> Vec<WordPoly> {
    let mut out = Vec::new();
    for side in [RelationSide::Left, RelationSide::Right] {
        for i in 1..=n {
            for j in 1..=n {
                out.push(unitarity_relation(n, i, j, side).expect("indices in range"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, s: &str) -> Word {
        Word::parse(n, s).unwrap()
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let x = w(2, "u11 u12*  u21");
        assert_eq!(x.to_string(), "u11 u12* u21");
        assert_eq!(x.len(), 3);
        assert!(w(3, "").is_empty());
        match Word::parse(2, "u11 u13") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        match Word::parse(2, "u11 v12") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        assert!(Word::parse(2, "u1").is_err());
        assert!(Word::parse(2, "u11**").is_err());
        assert!(Word::parse(2, "u01").is_err());
    }

    #[test]
    fn counit_examples() {
        assert_eq!(counit(&w(2, "u11 u22*")), ONE);
        assert_eq!(counit(&w(2, "u12")), ZERO);
        assert_eq!(counit(&w(2, "")), ONE);
    }

    #[test]
    fn antipode_examples() {
        assert_eq!(antipode(&w(2, "u12")), w(2, "u21*"));
        assert_eq!(antipode(&w(2, "u12* u11")), w(2, "u21 u11*"));
    }

    #[test]
    fn adjoint_reverses() {
        assert_eq!(adjoint(&w(2, "u12 u21*")), w(2, "u21 u12*"));
    }

    #[test]
    fn coproduct_of_generators() {
        let d = coproduct(&w(2, "u12")).unwrap();
        let shown: Vec<String> = d.iter().map(|b| b.to_string()).collect();
        assert_eq!(shown, ["u11(1) u12(2)", "u12(1) u22(2)"]);
        let d = coproduct(&w(2, "u11*")).unwrap();
        let shown: Vec<String> = d.iter().map(|b| b.to_string()).collect();
        assert_eq!(shown, ["u11*(2) u11*(1)", "u21*(2) u12*(1)"]);
        assert_eq!(coproduct(&w(3, "u11 u12* u33")).unwrap().len(), 27);
        assert_eq!(coproduct(&w(2, "")).unwrap(), vec![BiWord { n: 2, letters: vec![] }]);
    }

    #[test]
    fn relation_shapes() {
        let r = unitarity_relation(2, 1, 1, RelationSide::Left).unwrap();
        assert_eq!(r.len(), 3);
        let r = unitarity_relation(2, 1, 2, RelationSide::Right).unwrap();
        assert_eq!(r.len(), 2);
        assert!(unitarity_relation(2, 3, 1, RelationSide::Right).is_err());
    }

    #[test]
    fn poly_cancellation_keeps_no_zeros() {
        let mut p = WordPoly::zero(1);
        p.add_term(vec![Letter::u(1, 1)], ONE);
        p.add_term(vec![Letter::u(1, 1)], -ONE);
        assert!(p.is_empty());
    }

    #[test]
    fn word_enumeration_counts() {
        assert_eq!(words_of_length(2, 3).len(), 512);
        assert_eq!(words_up_to(1, 3).len(), 1 + 2 + 4 + 8);
    }
}
