//! Microtonal pitch processing over the 22-Shruti scale.
//!
//! Two decoders correct noisy pitch sequences and fill gaps under a raga grammar:
//! a grammar-constrained HMM ([`hmm`]) and a weighted edit transducer ([`fst`]).
//! [`datagen`] builds seeded synthetic corpora and [`eval`] scores models against
//! baselines.

pub mod datagen;
pub mod error;
pub mod eval;
pub mod fst;
pub mod hmm;
pub mod raga;
pub mod scale;
pub mod seqfile;
pub mod sequence;
pub mod wav;

pub use error::{Error, Result};
pub use fst::{CompletionParams, CostWeights, EditKind, EditOp, FstCorrection, FstParams, ShrutiFst};
pub use hmm::{HmmModel, Posterior, ViterbiPath};
pub use raga::{Direction, RagaSpec};
pub use scale::{ShrutiId, ShrutiScale};
pub use sequence::{Observation, PitchSequence};
