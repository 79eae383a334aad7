//! Seeded synthetic sequences: grammar walks, pitch corruption, and gap patterns.
//!
//! Every random draw goes through [`ChaCha8Rng`], so a seed reproduces the same
//! bytes on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raga::{Direction, RagaSpec};
use crate::scale::{ShrutiId, ShrutiScale};
use crate::sequence::{Observation, PitchSequence};

/// Chance per step of splicing in a whole pakad motif.
pub const PAKAD_SPLICE_PROB: f64 = 0.2;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with stream coordinates into an independent child seed.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// What a substituted note is replaced with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Substitution {
    /// A uniformly drawn entry of the full 22-Shruti table.
    FullScale,
    /// The true pitch shifted by a uniform offset in `[-max_cents, +max_cents]`.
    Detune { max_cents: f64 },
    /// `FullScale` with probability `full_scale_fraction`, otherwise `Detune`.
    Mixed { full_scale_fraction: f64, max_cents: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionConfig {
    pub substitution_rate: f64,
    /// Half-width of the uniform jitter added to every note.
    pub noise_cents: f64,
    pub seed: u64,
    #[serde(default = "default_substitution")]
    pub substitution: Substitution,
}

fn default_substitution() -> Substitution {
    Substitution::FullScale
}

impl CorruptionConfig {
    pub fn new(substitution_rate: f64, noise_cents: f64, seed: u64) -> Self {
        CorruptionConfig { substitution_rate, noise_cents, seed, substitution: Substitution::FullScale }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.substitution_rate) {
            return Err(Error::InvalidConfig(format!(
                "substitution_rate {} outside [0, 1]",
                self.substitution_rate
            )));
        }
        if !(self.noise_cents.is_finite() && self.noise_cents >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise_cents {} must be >= 0", self.noise_cents)));
        }
        let (width, fraction) = match self.substitution {
            Substitution::FullScale => (0.0, 1.0),
            Substitution::Detune { max_cents } => (max_cents, 0.0),
            Substitution::Mixed { full_scale_fraction, max_cents } => (max_cents, full_scale_fraction),
        };
        if !(width.is_finite() && width >= 0.0) {
            return Err(Error::InvalidConfig(format!("detune width {width} must be >= 0")));
        }
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidConfig(format!("full_scale_fraction {fraction} outside [0, 1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPattern {
    /// Each position independently.
    Random,
    /// One contiguous gap.
    Clustered,
    /// Every k-th position.
    Structured,
}

impl MissingPattern {
    pub const ALL: [MissingPattern; 3] =
        [MissingPattern::Random, MissingPattern::Clustered, MissingPattern::Structured];

    pub fn as_str(self) -> &'static str {
        match self {
            MissingPattern::Random => "random",
            MissingPattern::Clustered => "clustered",
            MissingPattern::Structured => "structured",
        }
    }
}

impl std::str::FromStr for MissingPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(MissingPattern::Random),
            "clustered" => Ok(MissingPattern::Clustered),
            "structured" => Ok(MissingPattern::Structured),
            _ => Err(Error::InvalidConfig(format!("unknown missing pattern `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissingConfig {
    pub missing_rate: f64,
    pub pattern: MissingPattern,
    pub seed: u64,
}

/// Sample a successor of `cur` in proportion to its normalized weights.
pub fn next_state<R: Rng>(raga: &RagaSpec, cur: ShrutiId, dir: Direction, rng: &mut R) -> ShrutiId {
    let rank = raga.rank(cur).expect("current state is active");
    let row = &raga.normalized_transitions(dir)[rank];
    sample_row(row, raga.active(), rng)
}

fn sample_row<R: Rng>(row: &[f64], states: &[ShrutiId], rng: &mut R) -> ShrutiId {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (p, &s) in row.iter().zip(states) {
        acc += p;
        if u < acc {
            return s;
        }
    }
    // rounding: fall back to the last state with support
    *row.iter().zip(states).rfind(|(p, _)| **p > 0.0).map(|(_, s)| s).expect("row has support")
}

fn legal_move(raga: &RagaSpec, a: ShrutiId, b: ShrutiId) -> bool {
    raga.allows(a, b, Direction::of_move(raga.cents_of(a), raga.cents_of(b)))
}

/// A weighted random walk on the raga graph.
///
/// The walk keeps a current direction, turning at the lowest and highest active
/// notes, and with probability [`PAKAD_SPLICE_PROB`] per step splices a whole
/// pakad motif when every move into and through it is legal.
pub fn generate_sequence(raga: &RagaSpec, length: usize, seed: u64) -> Result<Vec<ShrutiId>> {
    if length < 2 {
        return Err(Error::InvalidInput(format!("sequence length must be >= 2, got {length}")));
    }
    let mut rng = rng_from_seed(seed);
    let up = raga.normalized_transitions(Direction::Ascending);
    let down = raga.normalized_transitions(Direction::Descending);
    let active = raga.active();
    let (bottom, top) = (active[0], active[active.len() - 1]);

    let mut cur = active[rng.random_range(0..active.len())];
    let mut dir = if rng.random_bool(0.5) { Direction::Ascending } else { Direction::Descending };
    let mut seq = vec![cur];
    while seq.len() < length {
        if !raga.pakad().is_empty() && rng.random_bool(PAKAD_SPLICE_PROB) {
            let motif = &raga.pakad()[rng.random_range(0..raga.pakad().len())];
            let body: &[ShrutiId] = if motif[0] == cur { &motif[1..] } else { motif };
            let entry_ok = motif[0] == cur || legal_move(raga, cur, motif[0]);
            let inner_ok = motif.windows(2).all(|w| legal_move(raga, w[0], w[1]));
            if entry_ok && inner_ok && !body.is_empty() {
                for &s in body.iter().take(length - seq.len()) {
                    let prev = *seq.last().unwrap();
                    dir = Direction::of_move(raga.cents_of(prev), raga.cents_of(s));
                    seq.push(s);
                }
                cur = *seq.last().unwrap();
                continue;
            }
        }
        if dir == Direction::Ascending && cur == top {
            dir = Direction::Descending;
        } else if dir == Direction::Descending && cur == bottom {
            dir = Direction::Ascending;
        }
        let row = match dir {
            Direction::Ascending => &up,
            Direction::Descending => &down,
        };
        cur = sample_row(&row[raga.rank(cur).unwrap()], active, &mut rng);
        seq.push(cur);
    }
    Ok(seq)
}

/// Corrupted sequence plus which positions were substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct Corrupted {
    pub sequence: PitchSequence,
    pub substituted: Vec<bool>,
}

/// Substitute notes at `substitution_rate`, then jitter every note by uniform noise.
pub fn corrupt_with_mask(seq: &[ShrutiId], scale: &ShrutiScale, cfg: &CorruptionConfig) -> Result<Corrupted> {
    cfg.validate()?;
    if seq.is_empty() {
        return Err(Error::InvalidInput("cannot corrupt an empty sequence".into()));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut out = Vec::with_capacity(seq.len());
    let mut mask = Vec::with_capacity(seq.len());
    for &s in seq {
        let mut c = scale.cents_of(s);
        let hit = rng.random_bool(cfg.substitution_rate);
        if hit {
            let full = match cfg.substitution {
                Substitution::FullScale => true,
                Substitution::Detune { .. } => false,
                Substitution::Mixed { full_scale_fraction, .. } => rng.random_bool(full_scale_fraction),
            };
            c = match cfg.substitution {
                _ if full => scale.cents()[rng.random_range(0..scale.len())],
                Substitution::Detune { max_cents } | Substitution::Mixed { max_cents, .. } => {
                    c + uniform(&mut rng, max_cents)
                }
                Substitution::FullScale => unreachable!(),
            };
        }
        if cfg.noise_cents > 0.0 {
            c += uniform(&mut rng, cfg.noise_cents);
        }
        out.push(Observation::Cents(c));
        mask.push(hit);
    }
    Ok(Corrupted { sequence: PitchSequence::new(out)?, substituted: mask })
}

fn uniform<R: Rng>(rng: &mut R, half_width: f64) -> f64 {
    if half_width == 0.0 {
        0.0
    } else {
        rng.random_range(-half_width..=half_width)
    }
}

/// Corrupt a clean id sequence into observed cents.
pub fn corrupt(seq: &[ShrutiId], scale: &ShrutiScale, cfg: &CorruptionConfig) -> Result<PitchSequence> {
    corrupt_with_mask(seq, scale, cfg).map(|c| c.sequence)
}

/// Blank positions according to `cfg`; observed positions keep their exact cents.
pub fn apply_missing(seq: &[ShrutiId], scale: &ShrutiScale, cfg: &MissingConfig) -> Result<PitchSequence> {
    let len = seq.len();
    if len == 0 {
        return Err(Error::InvalidInput("cannot blank an empty sequence".into()));
    }
    let rate = cfg.missing_rate;
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidConfig(format!("missing_rate {rate} outside [0, 1)")));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut missing = vec![false; len];
    if rate > 0.0 {
        match cfg.pattern {
            MissingPattern::Random => {
                for m in missing.iter_mut() {
                    *m = rng.random_bool(rate);
                }
                if missing.iter().all(|&m| m) {
                    missing[rng.random_range(0..len)] = false;
                }
            }
            MissingPattern::Clustered => {
                let gap = (rate * len as f64).round() as usize;
                if gap >= len {
                    return Err(Error::InvalidConfig(format!(
                        "clustered gap of {gap} would blank all {len} positions"
                    )));
                }
                let start = rng.random_range(0..=len - gap);
                missing[start..start + gap].iter_mut().for_each(|m| *m = true);
            }
            MissingPattern::Structured => {
                let k = (1.0 / rate).round() as usize;
                if k <= 1 {
                    return Err(Error::InvalidConfig(format!(
                        "structured rate {rate} would blank every position"
                    )));
                }
                for (t, m) in missing.iter_mut().enumerate() {
                    *m = t % k == 0;
                }
            }
        }
    }
    PitchSequence::new(
        seq.iter()
            .zip(&missing)
            .map(|(&s, &m)| if m { Observation::Missing } else { Observation::Cents(scale.cents_of(s)) })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raga::{builtin, builtin_names, grammar_compliance};
    use crate::scale::fold_to_octave;

    fn id(i: usize) -> ShrutiId {
        ShrutiId::new(i).unwrap()
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, &[0]);
        let b = derive_seed(7, &[1]);
        let c = derive_seed(8, &[0]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, &[0]));
    }

    #[test]
    fn generated_sequences_are_compliant() {
        for name in builtin_names() {
            let r = builtin(name).unwrap();
            for seed in 0..50 {
                let s = generate_sequence(&r, 60, seed).unwrap();
                assert_eq!(s.len(), 60);
                assert_eq!(grammar_compliance(&s, &r), 1.0, "{name} seed {seed}: {s:?}");
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let r = builtin("bhairavi").unwrap();
        assert_eq!(generate_sequence(&r, 100, 42).unwrap(), generate_sequence(&r, 100, 42).unwrap());
        assert_ne!(generate_sequence(&r, 100, 42).unwrap(), generate_sequence(&r, 100, 43).unwrap());
        assert!(generate_sequence(&r, 1, 0).is_err());
    }

    #[test]
    fn single_successor_is_forced() {
        let mut rng = rng_from_seed(1);
        let mut checked = 0;
        for name in builtin_names() {
            let r = builtin(name).unwrap();
            for dir in [Direction::Ascending, Direction::Descending] {
                for (i, row) in r.normalized_transitions(dir).iter().enumerate() {
                    let support: Vec<usize> = (0..row.len()).filter(|&j| row[j] > 0.0).collect();
                    if support.len() != 1 {
                        continue;
                    }
                    checked += 1;
                    for _ in 0..50 {
                        assert_eq!(next_state(&r, r.active()[i], dir, &mut rng), r.active()[support[0]]);
                    }
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn successor_frequencies_match_weights() {
        let r = builtin("yaman").unwrap();
        let mut rng = rng_from_seed(99);
        // M# ascending: repeat not allowed; Pa (1 step) and Dha (2 steps) are.
        let from = id(12);
        let row = &r.normalized_transitions(Direction::Ascending)[r.rank(from).unwrap()];
        let n = 10_000;
        let mut counts = vec![0usize; r.num_active()];
        for _ in 0..n {
            counts[r.rank(next_state(&r, from, Direction::Ascending, &mut rng)).unwrap()] += 1;
        }
        let mut chi2 = 0.0;
        let mut dof = 0;
        for (c, &p) in counts.iter().zip(row) {
            if p == 0.0 {
                assert_eq!(*c, 0);
                continue;
            }
            let freq = *c as f64 / n as f64;
            assert!((freq - p).abs() < 0.02, "freq {freq} vs {p}");
            let e = p * n as f64;
            chi2 += (*c as f64 - e).powi(2) / e;
            dof += 1;
        }
        // 99.9% critical value for up to 6 degrees of freedom
        assert!(dof >= 2);
        assert!(chi2 < 22.46, "chi2 {chi2}");
    }

    #[test]
    fn corrupt_identity_and_determinism() {
        let r = builtin("yaman").unwrap();
        let s = generate_sequence(&r, 30, 3).unwrap();
        let clean = corrupt(&s, r.scale(), &CorruptionConfig::new(0.0, 0.0, 1)).unwrap();
        let expect: Vec<f64> = s.iter().map(|&x| r.cents_of(x)).collect();
        assert_eq!(clean.observed_cents().unwrap(), expect);
        let cfg = CorruptionConfig::new(1.0, 0.0, 5);
        let a = corrupt_with_mask(&s, r.scale(), &cfg).unwrap();
        assert!(a.substituted.iter().all(|&m| m));
        assert_eq!(a, corrupt_with_mask(&s, r.scale(), &cfg).unwrap());
        // substitutions land on scale entries
        for c in a.sequence.observed_cents().unwrap() {
            assert!(r.scale().cents().contains(&c));
        }
        assert!(corrupt(&s, r.scale(), &CorruptionConfig::new(1.5, 0.0, 0)).is_err());
        assert!(corrupt(&s, r.scale(), &CorruptionConfig::new(0.1, -1.0, 0)).is_err());
    }

    #[test]
    fn substitution_count_is_binomial() {
        // Rate 0.4 over 30 notes: mean 12, variance 7.2 per sequence.
        let r = builtin("yaman").unwrap();
        let s = generate_sequence(&r, 30, 0).unwrap();
        let runs = 1000;
        let counts: Vec<f64> = (0..runs)
            .map(|seed| {
                let c = corrupt_with_mask(&s, r.scale(), &CorruptionConfig::new(0.4, 0.0, seed)).unwrap();
                c.substituted.iter().filter(|&&m| m).count() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / runs as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        // standard error of the mean is sqrt(7.2 / 1000) ~ 0.085
        assert!((mean - 12.0).abs() < 0.35, "mean {mean}");
        assert!((var - 7.2).abs() < 1.5, "var {var}");
    }

    #[test]
    fn noise_stays_bounded() {
        let r = builtin("kalyan").unwrap();
        let s = generate_sequence(&r, 200, 11).unwrap();
        let cfg = CorruptionConfig {
            substitution_rate: 0.3,
            noise_cents: 50.0,
            seed: 4,
            substitution: Substitution::Detune { max_cents: 50.0 },
        };
        let c = corrupt_with_mask(&s, r.scale(), &cfg).unwrap();
        for ((o, &truth), &hit) in c.sequence.observed_cents().unwrap().iter().zip(&s).zip(&c.substituted) {
            assert!(o.is_finite());
            let f = fold_to_octave(*o).unwrap();
            assert!((0.0..1200.0).contains(&f));
            let bound = if hit { 100.0 } else { 50.0 };
            assert!((o - r.cents_of(truth)).abs() <= bound + 1e-9);
        }
    }

    #[test]
    fn missing_examples() {
        let r = builtin("yaman").unwrap();
        let scale = r.scale();
        let s10 = generate_sequence(&r, 10, 1).unwrap();
        let none = apply_missing(
            &s10,
            scale,
            &MissingConfig { missing_rate: 0.0, pattern: MissingPattern::Random, seed: 0 },
        )
        .unwrap();
        assert!(!none.has_missing());

        let c = apply_missing(
            &s10,
            scale,
            &MissingConfig { missing_rate: 0.5, pattern: MissingPattern::Clustered, seed: 3 },
        )
        .unwrap();
        let pos = c.missing_positions();
        assert_eq!(pos.len(), 5);
        assert!(pos.windows(2).all(|w| w[1] == w[0] + 1));

        let s12 = generate_sequence(&r, 12, 1).unwrap();
        let st = apply_missing(
            &s12,
            scale,
            &MissingConfig { missing_rate: 0.25, pattern: MissingPattern::Structured, seed: 0 },
        )
        .unwrap();
        assert_eq!(st.missing_positions(), vec![0, 4, 8]);

        // observed values are exact
        for (t, o) in st.items().iter().enumerate() {
            if let Observation::Cents(c) = o {
                assert_eq!(*c, r.cents_of(s12[t]));
            }
        }
    }

    #[test]
    fn missing_rejects_total_blanking() {
        let r = builtin("yaman").unwrap();
        let s = generate_sequence(&r, 4, 1).unwrap();
        let bad = |rate, pattern| {
            apply_missing(&s, r.scale(), &MissingConfig { missing_rate: rate, pattern, seed: 0 })
        };
        assert!(bad(1.0, MissingPattern::Random).is_err());
        assert!(bad(0.9, MissingPattern::Clustered).is_err());
        assert!(bad(0.8, MissingPattern::Structured).is_err());
        // random blanking always leaves an anchor
        for seed in 0..200 {
            let m = apply_missing(
                &s,
                r.scale(),
                &MissingConfig { missing_rate: 0.95, pattern: MissingPattern::Random, seed },
            )
            .unwrap();
            assert!(!m.all_missing());
        }
    }
}
