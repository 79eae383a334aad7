//! Shared fixtures for the decoder benchmarks.

use shruti_core::datagen::{corrupt, generate_sequence, CorruptionConfig};
use shruti_core::raga::builtin;
use shruti_core::{PitchSequence, RagaSpec};

/// A corrupted Yaman sequence of `length` notes.
pub fn fixture(length: usize, seed: u64) -> (RagaSpec, PitchSequence) {
    let raga = builtin("yaman").expect("yaman ships with the crate");
    let truth = generate_sequence(&raga, length, seed).expect("length >= 2");
    let seq = corrupt(&truth, raga.scale(), &CorruptionConfig::new(0.4, 10.0, seed)).expect("valid config");
    (raga, seq)
}
