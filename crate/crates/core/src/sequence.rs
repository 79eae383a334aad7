use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observed pitch in cents relative to the tonic, or a gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Observation {
    Cents(f64),
    Missing,
}

impl Observation {
    pub fn cents(self) -> Option<f64> {
        match self {
            Observation::Cents(c) => Some(c),
            Observation::Missing => None,
        }
    }

    pub fn is_missing(self) -> bool {
        matches!(self, Observation::Missing)
    }
}

/// A non-empty, time-ordered list of observations with finite cent values.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchSequence {
    items: Vec<Observation>,
}

impl PitchSequence {
    pub fn new(items: Vec<Observation>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidInput("pitch sequence is empty".into()));
        }
        if let Some(t) = items.iter().position(|o| matches!(o, Observation::Cents(c) if !c.is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite cent value at position {t}")));
        }
        Ok(PitchSequence { items })
    }

    /// Fully observed sequence.
    pub fn from_cents(cents: &[f64]) -> Result<Self> {
        Self::new(cents.iter().map(|&c| Observation::Cents(c)).collect())
    }

    pub fn items(&self) -> &[Observation] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, t: usize) -> Observation {
        self.items[t]
    }

    pub fn has_missing(&self) -> bool {
        self.items.iter().any(|o| o.is_missing())
    }

    pub fn all_missing(&self) -> bool {
        self.items.iter().all(|o| o.is_missing())
    }

    pub fn missing_positions(&self) -> Vec<usize> {
        (0..self.items.len()).filter(|&t| self.items[t].is_missing()).collect()
    }

    /// Cent values, failing if any position is missing.
    pub fn observed_cents(&self) -> Result<Vec<f64>> {
        self.items
            .iter()
            .enumerate()
            .map(|(t, o)| {
                o.cents().ok_or_else(|| {
                    Error::InvalidTask(format!(
                        "position {t} is MISSING; use completion instead of correction"
                    ))
                })
            })
            .collect()
    }
}
