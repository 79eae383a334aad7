use rand::Rng;

use crate::datagen::rng_from_seed;
use crate::error::{Error, Result};
use crate::raga::RagaSpec;
use crate::scale::{ShrutiId, ShrutiScale};
use crate::sequence::PitchSequence;

/// Quantize every note to the nearest entry of the full 22-Shruti table.
pub fn nearest_cent_baseline(seq: &PitchSequence, scale: &ShrutiScale) -> Result<Vec<ShrutiId>> {
    if seq.has_missing() {
        return Err(Error::InvalidTask("nearest-cent baseline cannot fill MISSING positions".into()));
    }
    seq.observed_cents()?.into_iter().map(|c| scale.nearest(c).map(|(id, _)| id)).collect()
}

/// Uniform draw over the raga's active notes at every position.
pub fn random_baseline(seq: &PitchSequence, raga: &RagaSpec, seed: u64) -> Vec<ShrutiId> {
    let mut rng = rng_from_seed(seed);
    let active = raga.active();
    (0..seq.len()).map(|_| active[rng.random_range(0..active.len())]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate_sequence;
    use crate::eval::metrics::shruti_accuracy;
    use crate::raga::builtin;
    use crate::sequence::Observation;

    #[test]
    fn nearest_examples() {
        let scale = ShrutiScale::default();
        let exact = PitchSequence::from_cents(scale.cents()).unwrap();
        let out = nearest_cent_baseline(&exact, &scale).unwrap();
        assert_eq!(out.iter().map(|s| s.index()).collect::<Vec<_>>(), (0..22).collect::<Vec<_>>());
        let one = PitchSequence::from_cents(&[100.0]).unwrap();
        assert_eq!(nearest_cent_baseline(&one, &scale).unwrap()[0].index(), 1);
        let gap = PitchSequence::new(vec![Observation::Cents(0.0), Observation::Missing]).unwrap();
        assert!(matches!(nearest_cent_baseline(&gap, &scale), Err(Error::InvalidTask(_))));
    }

    #[test]
    fn random_is_seeded_and_active() {
        let r = builtin("yaman").unwrap();
        let seq = PitchSequence::from_cents(&[0.0; 50]).unwrap();
        let a = random_baseline(&seq, &r, 3);
        assert_eq!(a, random_baseline(&seq, &r, 3));
        assert_ne!(a, random_baseline(&seq, &r, 4));
        assert!(a.iter().all(|&s| r.is_active(s)));
    }

    #[test]
    fn random_accuracy_converges_to_one_over_n() {
        for name in ["yaman", "kalyan"] {
            let r = builtin(name).unwrap();
            let runs = 1000;
            let mut total = 0.0;
            for seed in 0..runs {
                let truth = generate_sequence(&r, 30, seed).unwrap();
                let seq =
                    PitchSequence::from_cents(&truth.iter().map(|&s| r.cents_of(s)).collect::<Vec<_>>())
                        .unwrap();
                total += shruti_accuracy(&random_baseline(&seq, &r, seed + 10_000), &truth).unwrap();
            }
            let mean = total / runs as f64;
            let expect = 1.0 / r.num_active() as f64;
            assert!((mean - expect).abs() < 0.02, "{name}: {mean} vs {expect}");
        }
    }
}
