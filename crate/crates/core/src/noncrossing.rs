//! Non-crossing partitions: enumeration, relative Kreweras complements and
//! the moment/free-cumulant transforms.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use crate::error::{check_capacity, Error, Result};
use crate::linalg::{C64, ONE, ZERO};

pub const ENUMERATION_LIMIT: usize = 14;
pub const TRANSFORM_LIMIT: usize = 12;

/// A partition of an ordered ground set. Blocks are sorted internally and
/// listed by their minimum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NCPartition {
    ground: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl NCPartition {
    /// Validates that `blocks` partition `ground` without crossings.
    pub fn new(ground: Vec<usize>, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let p = Self::normalized(ground, blocks)?;
        if !is_noncrossing(&p.blocks) {
            return Err(Error::Invalid("partition has a crossing".into()));
        }
        Ok(p)
    }

    fn normalized(mut ground: Vec<usize>, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        ground.sort_unstable();
        if ground.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("ground has repeated positions".into()));
        }
        for b in blocks.iter_mut() {
            if b.is_empty() {
                return Err(Error::Invalid("empty block".into()));
            }
            b.sort_unstable();
        }
        blocks.sort();
        let mut all: Vec<usize> = blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        if all != ground {
            return Err(Error::Invalid("blocks do not partition the ground set".into()));
        }
        Ok(Self { ground, blocks })
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// `self` is finer than or equal to `other` (same ground).
    pub fn refines(&self, other: &NCPartition) -> bool {
        self.blocks.iter().all(|b| {
            other
                .blocks
                .iter()
                .any(|c| b.iter().all(|x| c.binary_search(x).is_ok()))
        })
    }
}

impl std::fmt::Display for NCPartition {
    /// `{1,3}{2}`
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.blocks {
            let items: Vec<String> = b.iter().map(|x| x.to_string()).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        Ok(())
    }
}

/// True iff no i<j<k<l has {i,k} in one block and {j,l} in another.
pub fn is_noncrossing(blocks: &[Vec<usize>]) -> bool {
    let mut owner: Vec<(usize, usize)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, blk)| blk.iter().map(move |&x| (x, b)))
        .collect();
    owner.sort_unstable();
    let labels: Vec<usize> = owner.iter().map(|&(_, b)| b).collect();
    labels_noncrossing(&labels)
}

/// Crossing test on a block-label sequence read in ground order.
fn labels_noncrossing(labels: &[usize]) -> bool {
    // Scan left to right with a stack of open blocks: a block may only be
    // revisited when it is on top of the stack.
    let mut last = std::collections::HashMap::new();
    for (pos, &b) in labels.iter().enumerate() {
        last.insert(b, pos);
    }
    let mut stack: Vec<usize> = Vec::new();
    for (pos, &b) in labels.iter().enumerate() {
        if let Some(idx) = stack.iter().rposition(|&x| x == b) {
            if idx != stack.len() - 1 {
                return false;
            }
        } else {
            stack.push(b);
        }
        if last[&b] == pos {
            stack.pop();
        }
    }
    true
}

/// Partitions of {0..m-1} as block bitmasks, in canonical order.
fn enumerate_masks(m: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut block_of = vec![0usize; m];
    let mut blocks: Vec<u16> = Vec::new();
    fn rec(pos: usize, m: usize, block_of: &mut Vec<usize>, blocks: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if pos == m {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            let last = 15 - (blocks[b].leading_zeros() as usize);
            // every position strictly between `last` and `pos` must belong to
            // a block opened after `last`
            let ok = (last + 1..pos).all(|p| (blocks[block_of[p]].trailing_zeros() as usize) > last);
            if ok {
                blocks[b] |= 1 << pos;
                block_of[pos] = b;
                rec(pos + 1, m, block_of, blocks, out);
                blocks[b] &= !(1 << pos);
            }
        }
        blocks.push(1 << pos);
        block_of[pos] = blocks.len() - 1;
        rec(pos + 1, m, block_of, blocks, out);
        blocks.pop();
    }
    rec(0, m, &mut block_of, &mut blocks, &mut out);
    out.sort_by_key(|p| mask_partition_key(p));
    out
}

/// Lexicographic order on the block lists equals the order of the flattened
/// sequence `x+1 … 0 x+1 … 0`, packed big-endian into 4-bit digits.
fn mask_partition_key(p: &[u16]) -> u128 {
    let mut key = 0u128;
    let mut digits = 0;
    for &mask in p {
        for i in 0..16u128 {
            if mask & (1 << i) != 0 {
                key = (key << 4) | (i + 1);
                digits += 1;
            }
        }
        key <<= 4;
        digits += 1;
    }
    key << (4 * (32 - digits))
}

/// Cached mask tables for the transforms (m ≤ 12).
fn mask_table(m: usize) -> Arc<Vec<Vec<u16>>> {
    static TABLES: [OnceLock<Arc<Vec<Vec<u16>>>>; TRANSFORM_LIMIT + 1] =
        [const { OnceLock::new() }; TRANSFORM_LIMIT + 1];
    TABLES[m].get_or_init(|| Arc::new(enumerate_masks(m))).clone()
}

/// All non-crossing partitions of {1..m}.
pub fn enumerate_nc(m: usize) -> Result<Vec<NCPartition>> {
    check_capacity("non-crossing enumeration", m, ENUMERATION_LIMIT)?;
    let ground: Vec<usize> = (1..=m).collect();
    let masks = if m <= TRANSFORM_LIMIT {
        mask_table(m)
    } else {
        Arc::new(enumerate_masks(m))
    };
    Ok(masks
        .iter()
        .map(|p| NCPartition {
            ground: ground.clone(),
            blocks: p
                .iter()
                .map(|&mask| (0..m).filter(|&i| mask & (1 << i) != 0).map(|i| i + 1).collect())
                .collect(),
        })
        .collect())
}

/// Non-crossing partitions of an arbitrary ordered ground set.
pub fn enumerate_nc_on(ground: &[usize]) -> Result<Vec<NCPartition>> {
    let mut g = ground.to_vec();
    g.sort_unstable();
    Ok(enumerate_nc(g.len())?
        .into_iter()
        .map(|p| NCPartition {
            ground: g.clone(),
            blocks: p.blocks.iter().map(|b| b.iter().map(|&i| g[i - 1]).collect()).collect(),
        })
        .collect())
}

pub fn catalan(m: usize) -> u64 {
    let mut c: u64 = 1;
    for k in 0..m as u64 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// The coarsest partition μ of F such that σ ∪ μ is non-crossing on E ∪ F.
/// Two points a < b of F share a block iff no block of σ has points both
/// strictly between them and outside [a, b].
pub fn kreweras_relative(sigma: &NCPartition, f: &[usize]) -> Result<NCPartition> {
    let e: BTreeSet<usize> = sigma.ground.iter().copied().collect();
    let mut fs: Vec<usize> = f.to_vec();
    fs.sort_unstable();
    fs.dedup();
    if fs.len() != f.len() {
        return Err(Error::Invalid("F has repeated positions".into()));
    }
    if fs.iter().any(|x| e.contains(x)) {
        return Err(Error::Overlap);
    }
    let separated = |a: usize, b: usize| {
        sigma.blocks.iter().any(|blk| {
            let inside = blk.iter().any(|&x| a < x && x < b);
            let outside = blk.iter().any(|&x| x < a || x > b);
            inside && outside
        })
    };
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for &x in &fs {
        match blocks.iter_mut().find(|b| !separated(b[0], x)) {
            Some(b) => b.push(x),
            None => blocks.push(vec![x]),
        }
    }
    NCPartition::normalized(fs, blocks)
}

/// Brute-force check that `mu` is the coarsest admissible partition of its
/// ground: admissible itself, and every admissible partition refines it.
pub fn kreweras_is_maximal_brute_force(sigma: &NCPartition, mu: &NCPartition) -> bool {
    kreweras_is_maximal_among(sigma, mu, &all_set_partitions(&mu.ground))
}

/// As [`kreweras_is_maximal_brute_force`] with the set partitions of the
/// ground supplied by the caller.
pub fn kreweras_is_maximal_among(sigma: &NCPartition, mu: &NCPartition, candidates: &[NCPartition]) -> bool {
    let admissible = |cand: &NCPartition| {
        let mut all = sigma.blocks.clone();
        all.extend(cand.blocks.iter().cloned());
        is_noncrossing(&all)
    };
    admissible(mu) && candidates.iter().filter(|p| admissible(p)).all(|p| p.refines(mu))
}

/// Every set partition (crossing or not) of a small ground set.
pub fn all_set_partitions(ground: &[usize]) -> Vec<NCPartition> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; ground.len()];
    fn rec(pos: usize, nb: usize, labels: &mut Vec<usize>, ground: &[usize], out: &mut Vec<NCPartition>) {
        if pos == ground.len() {
            let mut blocks = vec![Vec::new(); nb];
            for (i, &l) in labels.iter().enumerate() {
                blocks[l].push(ground[i]);
            }
            out.push(NCPartition::normalized(ground.to_vec(), blocks).expect("valid"));
            return;
        }
        for l in 0..=nb {
            labels[pos] = l;
            rec(pos + 1, nb.max(l + 1), labels, ground, out);
        }
    }
    rec(0, 0, &mut labels, ground, &mut out);
    out
}

/// Positions of set bits of `mask`, ascending.
fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask & (1 << i) != 0)
}

/// Spreads a local mask over the set bits of `support`.
fn deposit(local: u16, support: &[usize]) -> u32 {
    let mut out = 0u32;
    for (i, &pos) in support.iter().enumerate() {
        if local & (1 << i) != 0 {
            out |= 1 << pos;
        }
    }
    out
}

/// Free cumulants of every subsequence of `letters`, indexed by position
/// bitmask and computed lazily from a moment functional.
pub struct CumulantTable<'a, L, F: FnMut(&[L]) -> C64> {
    letters: &'a [L],
    phi: F,
    cache: Vec<Option<C64>>,
    scratch: Vec<L>,
}

impl<'a, L: Clone, F: FnMut(&[L]) -> C64> CumulantTable<'a, L, F> {
    pub fn new(letters: &'a [L], phi: F) -> Result<Self> {
        check_capacity("cumulant transform length", letters.len(), TRANSFORM_LIMIT)?;
        Ok(Self {
            letters,
            phi,
            cache: vec![None; 1 << letters.len()],
            scratch: Vec::new(),
        })
    }

    fn moment(&mut self, mask: u32) -> C64 {
        self.scratch.clear();
        for i in bits(mask) {
            self.scratch.push(self.letters[i].clone());
        }
        (self.phi)(&self.scratch)
    }

    /// κ of the subsequence selected by `mask` (non-empty).
    pub fn kappa(&mut self, mask: u32) -> C64 {
        if let Some(v) = self.cache[mask as usize] {
            return v;
        }
        let support: Vec<usize> = bits(mask).collect();
        let k = support.len();
        let table = mask_table(k);
        let mut value = self.moment(mask);
        for part in table.iter() {
            if part.len() == 1 {
                continue;
            }
            let mut prod = ONE;
            for &b in part {
                prod *= self.kappa(deposit(b, &support));
                if prod == ZERO {
                    break;
                }
            }
            value -= prod;
        }
        self.cache[mask as usize] = Some(value);
        value
    }

    pub fn full(&mut self) -> C64 {
        if self.letters.is_empty() {
            return ONE;
        }
        self.kappa((1u32 << self.letters.len()) - 1)
    }
}

/// κ_m(letters) from a moment functional.
pub fn cumulants_from_moments<L: Clone>(phi: impl FnMut(&[L]) -> C64, letters: &[L]) -> Result<C64> {
    Ok(CumulantTable::new(letters, phi)?.full())
}

/// Σ_{σ ∈ NC(m)} Π_B κ(letters|B).
pub fn moments_from_cumulants<L: Clone>(mut kappa: impl FnMut(&[L]) -> C64, letters: &[L]) -> Result<C64> {
    let m = letters.len();
    check_capacity("cumulant transform length", m, TRANSFORM_LIMIT)?;
    let table = mask_table(m);
    let mut cache: Vec<Option<C64>> = vec![None; 1 << m];
    let mut scratch: Vec<L> = Vec::with_capacity(m);
    let mut total = ZERO;
    for part in table.iter() {
        let mut prod = ONE;
        for &b in part {
            let v = match cache[b as usize] {
                Some(v) => v,
                None => {
                    scratch.clear();
                    scratch.extend(bits(b as u32).map(|i| letters[i].clone()));
                    let v = kappa(&scratch);
                    cache[b as usize] = Some(v);
                    v
                }
            };
            prod *= v;
            if prod == ZERO {
                break;
            }
        }
        total += prod;
    }
    Ok(total)
}

/// Free cumulant of a Haar unitary: letters are star flags.
pub fn haar_unitary_cumulant(stars: &[bool]) -> C64 {
    let r = stars.len();
    if r == 0 || r % 2 == 1 || stars.windows(2).any(|w| w[0] == w[1]) {
        return ZERO;
    }
    let k = r / 2 - 1;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    C64::new(sign * catalan(k) as f64, 0.0)
}

/// Moment of a Haar unitary: 1 if the word cancels to 1, else 0.
pub fn haar_unitary_moment(stars: &[bool]) -> C64 {
    let net: i64 = stars.iter().map(|&s| if s { -1 } else { 1 }).sum();
    if net == 0 {
        ONE
    } else {
        ZERO
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(blocks: &[&[usize]]) -> Vec<Vec<usize>> {
        blocks.iter().map(|b| b.to_vec()).collect()
    }

    #[test]
    fn crossing_definition() {
        assert!(is_noncrossing(&p(&[&[1, 2], &[3, 4]])));
        assert!(!is_noncrossing(&p(&[&[1, 3], &[2, 4]])));
        assert!(is_noncrossing(&p(&[&[1, 4], &[2, 3]])));
        assert!(!is_noncrossing(&p(&[&[1, 5], &[2, 7], &[3]])));
    }

    #[test]
    fn small_enumerations() {
        let e0 = enumerate_nc(0).unwrap();
        assert_eq!(e0.len(), 1);
        assert!(e0[0].blocks().is_empty());
        assert_eq!(enumerate_nc(3).unwrap().len(), 5);
        let e4 = enumerate_nc(4).unwrap();
        assert_eq!(e4.len(), 14);
        let has = |b: Vec<Vec<usize>>| e4.iter().any(|q| q.blocks() == b.as_slice());
        assert!(has(p(&[&[1, 3], &[2], &[4]])));
        assert!(!has(p(&[&[1, 3], &[2, 4]])));
        assert!(matches!(enumerate_nc(15), Err(Error::Capacity { .. })));
    }

    #[test]
    fn canonical_order_is_sorted_and_unique() {
        let e = enumerate_nc(6).unwrap();
        assert!(e.windows(2).all(|w| w[0].blocks() < w[1].blocks()));
        assert_eq!(e[0].blocks(), p(&[&[1], &[2], &[3], &[4], &[5], &[6]]).as_slice());
    }

    #[test]
    fn kreweras_examples() {
        let s = NCPartition::new(vec![1, 3], p(&[&[1, 3]])).unwrap();
        assert_eq!(
            kreweras_relative(&s, &[2, 4]).unwrap().blocks(),
            p(&[&[2], &[4]]).as_slice()
        );
        let s = NCPartition::new(vec![1, 3], p(&[&[1], &[3]])).unwrap();
        assert_eq!(
            kreweras_relative(&s, &[2, 4]).unwrap().blocks(),
            p(&[&[2, 4]]).as_slice()
        );
        let s = NCPartition::new(vec![], vec![]).unwrap();
        assert_eq!(
            kreweras_relative(&s, &[1, 2]).unwrap().blocks(),
            p(&[&[1, 2]]).as_slice()
        );
        let s = NCPartition::new(vec![1, 3], p(&[&[1, 3]])).unwrap();
        assert_eq!(kreweras_relative(&s, &[3]), Err(Error::Overlap));
    }

    #[test]
    fn transform_examples() {
        let mom = |l: &[bool]| haar_unitary_moment(l);
        assert_eq!(cumulants_from_moments(mom, &[false, true]).unwrap(), ONE);
        assert_eq!(cumulants_from_moments(mom, &[false, false]).unwrap(), ZERO);
        let phi = |l: &[u8]| C64::new(l.len() as f64 + 0.5, l[0] as f64);
        assert_eq!(cumulants_from_moments(phi, &[3u8]).unwrap(), C64::new(1.5, 3.0));
        let kap = |l: &[bool]| haar_unitary_cumulant(l);
        assert_eq!(moments_from_cumulants(kap, &[false, true, false, true]).unwrap(), ONE);
        assert_eq!(moments_from_cumulants(kap, &[false, false, true, true]).unwrap(), ONE);
        let zero = |_: &[bool]| ZERO;
        assert_eq!(moments_from_cumulants(zero, &[true]).unwrap(), ZERO);
        assert!(moments_from_cumulants(kap, &[true; 13]).is_err());
    }

    #[test]
    fn catalan_numbers() {
        let c: Vec<u64> = (0..8).map(catalan).collect();
        assert_eq!(c, [1, 1, 2, 5, 14, 42, 132, 429]);
    }
}
