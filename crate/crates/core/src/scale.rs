//! The 22-Shruti cent table, octave folding, and nearest-Shruti quantization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const OCTAVE_CENTS: f64 = 1200.0;
pub const SHRUTI_COUNT: usize = 22;

/// Cent values of the 22 Shrutis relative to the tonic.
pub const DEFAULT_CENTS: [f64; SHRUTI_COUNT] = [
    0.0, 90.0, 112.0, 182.0, 204.0, 294.0, 316.0, 386.0, 408.0, 498.0, 520.0, 590.0, 612.0, 702.0, 792.0,
    814.0, 884.0, 906.0, 996.0, 1018.0, 1088.0, 1110.0,
];

/// Index into a [`ShrutiScale`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShrutiId(u8);

impl ShrutiId {
    pub fn new(index: usize) -> Result<Self> {
        if index < SHRUTI_COUNT {
            Ok(ShrutiId(index as u8))
        } else {
            Err(Error::InvalidInput(format!("shruti index {index} outside [0, {}]", SHRUTI_COUNT - 1)))
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for ShrutiId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered table of Shruti positions within one octave, anchored at a tonic frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrutiScale {
    cents: Vec<f64>,
    tonic_hz: f64,
}

impl Default for ShrutiScale {
    fn default() -> Self {
        ShrutiScale { cents: DEFAULT_CENTS.to_vec(), tonic_hz: 440.0 }
    }
}

impl ShrutiScale {
    /// The standard 22-entry table with the given tonic.
    pub fn with_tonic(tonic_hz: f64) -> Result<Self> {
        Self::custom(DEFAULT_CENTS.to_vec(), tonic_hz)
    }

    /// A scale with an arbitrary table. The table must start at 0, be strictly
    /// increasing and stay below one octave.
    pub fn custom(cents: Vec<f64>, tonic_hz: f64) -> Result<Self> {
        if cents.is_empty() || cents[0] != 0.0 {
            return Err(Error::InvalidInput("scale must start at 0 cents".into()));
        }
        if cents.iter().any(|c| !c.is_finite() || *c >= OCTAVE_CENTS) {
            return Err(Error::InvalidInput("scale entries must lie in [0, 1200)".into()));
        }
        if cents.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("scale must be strictly increasing".into()));
        }
        if !(tonic_hz.is_finite() && tonic_hz > 0.0) {
            return Err(Error::InvalidInput(format!("tonic_hz must be positive, got {tonic_hz}")));
        }
        Ok(ShrutiScale { cents, tonic_hz })
    }

    pub fn len(&self) -> usize {
        self.cents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cents.is_empty()
    }

    pub fn cents(&self) -> &[f64] {
        &self.cents
    }

    pub fn tonic_hz(&self) -> f64 {
        self.tonic_hz
    }

    /// Cent value of a Shruti. Panics if the id is outside this scale.
    #[inline]
    pub fn cents_of(&self, id: ShrutiId) -> f64 {
        self.cents[id.index()]
    }

    /// Nearest scale entry to `cents` under octave-circular distance.
    ///
    /// Returns the index and the signed deviation `input - shruti`, taken along the
    /// shorter way around the octave so that `|deviation| <= 600`. Exact ties go to
    /// the lower index.
    pub fn nearest(&self, cents: f64) -> Result<(ShrutiId, f64)> {
        let folded = fold_to_octave(cents)?;
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for (i, &c) in self.cents.iter().enumerate() {
            let d = circular_distance(folded, c);
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        let deviation = signed_circular(folded, self.cents[best]);
        Ok((ShrutiId(best as u8), deviation))
    }

    /// Smallest absolute difference between two distinct entries.
    pub fn min_interval(&self) -> f64 {
        // Strictly increasing, so the minimum is over adjacent pairs.
        self.cents.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// `tonic_hz * 2^(cents / 1200)`.
    pub fn cents_to_hz(&self, cents: f64) -> f64 {
        cents_to_hz(self.tonic_hz, cents)
    }
}

/// `tonic_hz * 2^(cents / 1200)`.
pub fn cents_to_hz(tonic_hz: f64, cents: f64) -> f64 {
    tonic_hz * (cents / OCTAVE_CENTS).exp2()
}

/// Reduce a cent value into `[0, 1200)`.
pub fn fold_to_octave(cents: f64) -> Result<f64> {
    if !cents.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite cent value {cents}")));
    }
    let r = cents.rem_euclid(OCTAVE_CENTS);
    // rem_euclid can round up to exactly 1200 for tiny negative inputs.
    Ok(if r >= OCTAVE_CENTS { 0.0 } else { r })
}

/// Distance between two pitches on the octave circle, in `[0, 600]`.
#[inline]
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(OCTAVE_CENTS);
    d.min(OCTAVE_CENTS - d)
}

/// Signed circular difference `a - b`, in `(-600, 600]`.
#[inline]
pub fn signed_circular(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(OCTAVE_CENTS);
    if d > OCTAVE_CENTS / 2.0 {
        d - OCTAVE_CENTS
    } else {
        d
    }
}
