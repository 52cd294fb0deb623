//! Exact and Monte Carlo moment computations on the unitary dual group U⟨n⟩.

pub mod brown_words;
pub mod convolutions;
pub mod error;
pub mod haar_traces;
pub mod linalg;
pub mod matrix_lab;
pub mod noncrossing;
pub mod nonexistence;
pub mod schurmann;
pub mod states;
pub mod validation;

pub use brown_words::{BiLetter, BiWord, Leg, Letter, Word, WordPoly};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use states::{SharedState, StateEvaluator};
