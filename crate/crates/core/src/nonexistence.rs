//! Witnesses that no Haar state exists on U⟨n⟩ for n ≥ 2: the vector states
//! φ_k built from permutation matrices M_k, and the moment-matrix identities
//! that any boolean, monotone or anti-monotone Haar state would satisfy.

use serde::Serialize;

use crate::brown_words::{Letter, Word};
use crate::convolutions::{convolve, ProductKind};
use crate::error::{Error, Result};
#[cfg(test)]
use crate::linalg::C64;
use crate::linalg::{ComplexMatrix, I, ONE, ZERO};
use crate::states::{FiniteMeasureState, MomentMatrices, RepVectorState, SharedState, StateEvaluator};

/// ½(δ_I + δ_{−I}): N = N̄ = 0 and M = M' = I.
pub fn phi1(n: usize) -> FiniteMeasureState {
    let id = ComplexMatrix::identity(n);
    FiniteMeasureState::new(vec![(0.5, id.clone()), (0.5, id.scale(-ONE))]).expect("valid atoms")
}

/// ½(δ_A + δ_Ā) with A = Diag(i, 1, …, 1).
pub fn phi2(n: usize) -> FiniteMeasureState {
    let mut d = vec![ONE; n];
    d[0] = I;
    let a = ComplexMatrix::diagonal(&d);
    FiniteMeasureState::new(vec![(0.5, a.clone()), (0.5, a.conj())]).expect("valid atoms")
}

/// The 2n×2n permutation matrix M_k: identity blocks I_{2k−2} and
/// I_{2n−2k−2} around the 4×4 pattern
/// (0 1 0 0 / 0 0 1 0 / 1 0 0 0 / 0 0 0 1); for k = n the pattern of
/// k = n−1 is used with the last two column blocks exchanged.
pub fn woronowicz_matrix(n: usize, k: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::Invalid("the witnesses need n ≥ 2".into()));
    }
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    let base = k.min(n - 1);
    let size = 2 * n;
    let off = 2 * (base - 1);
    let mut m = ComplexMatrix::zeros(size, size);
    for i in (0..off).chain(off + 4..size) {
        m[(i, i)] = ONE;
    }
    for (r, c) in [(0, 1), (1, 2), (2, 0), (3, 3)] {
        m[(off + r, off + c)] = ONE;
    }
    if k == n {
        let (a, b) = (2 * (n - 2), 2 * (n - 1));
        m = ComplexMatrix::from_fn(size, size, |i, j| {
            let j2 = match j {
                j if (a..a + 2).contains(&j) => j + 2,
                j if (b..b + 2).contains(&j) => j - 2,
                j => j,
            };
            m[(i, j2)]
        });
    }
    Ok(m)
}

/// φ_k(a) = ⟨e_2, j(a) e_2⟩ for the block representation of M_k.
pub fn build_woronowicz_state(n: usize, k: usize) -> Result<RepVectorState> {
    RepVectorState::new(n, 2, &woronowicz_matrix(n, k)?, 2)
}

/// max_{p,q} |φ_k(u_pk u*_qk)|; zero for every k.
pub fn woronowicz_vanishing(n: usize, k: usize) -> Result<f64> {
    let s = build_woronowicz_state(n, k)?;
    let mut worst: f64 = 0.0;
    for p in 1..=n {
        for q in 1..=n {
            worst = worst.max(s.eval_letters(&[Letter::u(p, k), Letter::ustar(q, k)])?.norm());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionEntry {
    pub k: usize,
    /// h(u_ik u*_ik)
    pub h_value: f64,
    /// (h ⋆ φ_k)(u_ik u*_ik) via the product evaluator
    pub convolved: f64,
    /// Σ_{p,q} h(u_ip u*_iq) φ_k(u_pk u*_qk)
    pub factorized: f64,
    /// max |φ_k(u_pk u*_qk)|
    pub witness_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub kind: String,
    pub n: usize,
    pub row: usize,
    pub entries: Vec<ObstructionEntry>,
    /// Σ_k h(u_ik u*_ik), which the relations force to be 1.
    pub unitarity_total: f64,
    /// max_k |h(u_ik u*_ik) − (h ⋆ φ_k)(u_ik u*_ik)|
    pub residual_max: f64,
    /// max_k |convolved − factorized|
    pub factorization_gap: f64,
}

/// An absorbing h would satisfy h(u_ik u*_ik) = (h ⋆ φ_k)(u_ik u*_ik) = 0
/// for every k, contradicting Σ_k h(u_ik u*_ik) = 1. Works for the free and
/// tensor products, where (h·φ)(a b c) = h(ac) φ(b).
pub fn check_free_obstruction(n: usize, h: SharedState, kind: ProductKind, row: usize) -> Result<ObstructionReport> {
    if !matches!(kind, ProductKind::Free | ProductKind::Tensor) {
        return Err(Error::Invalid(format!(
            "the φ_k obstruction applies to free and tensor, not {kind}"
        )));
    }
    if h.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h.dim(),
        });
    }
    if row == 0 || row > n {
        return Err(Error::IndexOutOfRange { index: row, n });
    }
    let i = row;
    let mut entries = Vec::with_capacity(n);
    let mut total = ZERO;
    for k in 1..=n {
        let phi = build_woronowicz_state(n, k)?;
        let word = Word::new(n, vec![Letter::u(i, k), Letter::ustar(i, k)])?;
        let h_value = h.eval(&word)?;
        total += h_value;
        let conv = convolve(kind, h.clone(), std::sync::Arc::new(phi.clone()))?;
        let convolved = conv.eval(&word)?;
        let mut factorized = ZERO;
        let mut witness_max: f64 = 0.0;
        for p in 1..=n {
            for q in 1..=n {
                let w = phi.eval_letters(&[Letter::u(p, k), Letter::ustar(q, k)])?;
                witness_max = witness_max.max(w.norm());
                factorized += h.eval_letters(&[Letter::u(i, p), Letter::ustar(i, q)])? * w;
            }
        }
        entries.push(ObstructionEntry {
            k,
            h_value: h_value.re,
            convolved: convolved.re,
            factorized: factorized.re,
            witness_max,
        });
    }
    let residual_max = entries
        .iter()
        .map(|e| (e.h_value - e.convolved).abs())
        .fold(0.0, f64::max);
    let factorization_gap = entries
        .iter()
        .map(|e| (e.convolved - e.factorized).abs())
        .fold(0.0, f64::max);
    Ok(ObstructionReport {
        kind: kind.to_string(),
        n,
        row,
        entries,
        unitarity_total: total.re,
        residual_max,
        factorization_gap,
    })
}

fn square_check(m_h: &ComplexMatrix, phi: &MomentMatrices) -> Result<()> {
    let nn = phi.m.rows();
    if m_h.rows() != nn || m_h.cols() != nn {
        return Err(Error::DimensionMismatch {
            expected: nn,
            got: m_h.rows(),
        });
    }
    Ok(())
}

/// M_h − [(M_h − I)(N̄_φ ⊗ N_φ) + M_φ], with M the u*u moment matrix.
/// Zero for a boolean (or monotone) Haar state h and every φ.
pub fn check_boolean_identity(m_h: &ComplexMatrix, phi: &MomentMatrices) -> Result<ComplexMatrix> {
    square_check(m_h, phi)?;
    let id = ComplexMatrix::identity(m_h.rows());
    let rhs = m_h.sub(&id).matmul(&phi.nbar.kron(&phi.n)).add(&phi.m);
    Ok(m_h.sub(&rhs))
}

/// M'_h − [(N_φ ⊗ N̄_φ)(M'_h − I) + M'_φ], with M' the u u* moment matrix.
/// Zero for an anti-monotone Haar state h and every φ.
pub fn check_monotone_identity(m_h_rev: &ComplexMatrix, phi: &MomentMatrices) -> Result<ComplexMatrix> {
    square_check(m_h_rev, phi)?;
    let id = ComplexMatrix::identity(m_h_rev.rows());
    let rhs = phi.n.kron(&phi.nbar).matmul(&m_h_rev.sub(&id)).add(&phi.m_rev);
    Ok(m_h_rev.sub(&rhs))
}

/// Largest entry of a residual and its position as 1-based index pairs
/// ((i,k),(j,l)).
pub fn residual_witness(res: &ComplexMatrix, n: usize) -> (f64, [[usize; 2]; 2]) {
    let mut best = (0.0, [[1, 1], [1, 1]]);
    for r in 0..res.rows() {
        for c in 0..res.cols() {
            let v = res[(r, c)].norm();
            if v > best.0 {
                best = (v, [[r / n + 1, r % n + 1], [c / n + 1, c % n + 1]]);
            }
        }
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub description: String,
    pub word: Option<String>,
    pub index: Option<[[usize; 2]; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub identity: String,
    pub n: usize,
    pub residual_max: f64,
    pub witness: Witness,
}

/// The two-step contradiction for an identity of boolean type: φ1 forces
/// M_h = I, and then φ2 leaves a residual of size 1.
pub fn boolean_counterexample(n: usize) -> Result<CounterexampleReport> {
    let mm1 = crate::states::moment_matrices(&phi1(n))?;
    let mm2 = crate::states::moment_matrices(&phi2(n))?;
    // with N = 0 the identity reads M_h = M_φ1 = I
    let forced = mm1.m.clone();
    let res = check_boolean_identity(&forced, &mm2)?;
    let (max, idx) = residual_witness(&res, n);
    Ok(CounterexampleReport {
        identity: "M_h = (M_h - I)(Nbar ⊗ N) + M_phi".into(),
        n,
        residual_max: max,
        witness: Witness {
            description: "phi1 forces M_h = I; phi2 then violates the identity".into(),
            word: Some(format!("u{}{}* u{}{}", idx[0][0], idx[1][0], idx[0][1], idx[1][1])),
            index: Some(idx),
        },
    })
}

pub fn monotone_counterexample(n: usize) -> Result<CounterexampleReport> {
    let mm1 = crate::states::moment_matrices(&phi1(n))?;
    let mm2 = crate::states::moment_matrices(&phi2(n))?;
    let forced = mm1.m_rev.clone();
    let res = check_monotone_identity(&forced, &mm2)?;
    let (max, idx) = residual_witness(&res, n);
    Ok(CounterexampleReport {
        identity: "M'_h = (N ⊗ Nbar)(M'_h - I) + M'_phi".into(),
        n,
        residual_max: max,
        witness: Witness {
            description: "phi1 forces M'_h = I; phi2 then violates the identity".into(),
            word: Some(format!("u{}{} u{}{}*", idx[0][0], idx[1][0], idx[0][1], idx[1][1])),
            index: Some(idx),
        },
    })
}

pub fn free_counterexample(n: usize, h: SharedState) -> Result<CounterexampleReport> {
    let rep = check_free_obstruction(n, h, ProductKind::Free, 1)?;
    let worst = rep
        .entries
        .iter()
        .max_by(|a, b| {
            (a.h_value - a.convolved)
                .abs()
                .total_cmp(&(b.h_value - b.convolved).abs())
        })
        .map(|e| e.k)
        .unwrap_or(1);
    Ok(CounterexampleReport {
        identity: "h(u_ik u*_ik) = (h ⋆F phi_k)(u_ik u*_ik)".into(),
        n,
        residual_max: rep.residual_max,
        witness: Witness {
            description: format!(
                "phi_k kills every u_pk u*_qk, so absorption forces h(u_1k u*_1k) = 0 for all k, but they sum to {}",
                rep.unitarity_total
            ),
            word: Some(format!("u1{worst} u1{worst}*")),
            index: None,
        },
    })
}

/// Entries of `(h ⋆ φ)` on the words that index M (u*u) or M' (u u*).
pub fn convolved_moment_matrix(conv: &dyn StateEvaluator, reversed: bool) -> Result<ComplexMatrix> {
    let n = conv.dim();
    let mut out = ComplexMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let letters = if reversed {
                        [Letter::u(i + 1, j + 1), Letter::ustar(k + 1, l + 1)]
                    } else {
                        [Letter::ustar(i + 1, j + 1), Letter::u(k + 1, l + 1)]
                    };
                    out[(i * n + k, j * n + l)] = conv.eval_letters(&letters)?;
                }
            }
        }
    }
    Ok(out)
}
