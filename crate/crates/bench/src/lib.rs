//! Benchmark bodies. The files under `benches/` only register them.

pub mod exact;
pub mod matrices;

use udg_core::brown_words::Word;

/// (u11 u11*)^k: alternating and cyclic, so no early exit in either trace.
pub fn alternating_word(n: usize, k: usize) -> Word {
    let text = vec!["u11 u11*"; k].join(" ");
    Word::parse(n, &text).expect("valid word")
}

/// A word mixing all four index pairs at n = 2.
pub fn mixed_word(len: usize) -> Word {
    const CYCLE: [&str; 4] = ["u12", "u21*", "u11", "u22*"];
    let text = (0..len).map(|i| CYCLE[i % 4]).collect::<Vec<_>>().join(" ");
    Word::parse(2, &text).expect("valid word")
}
