//! Raga grammars: directed, direction-split transition graphs over Shruti positions.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scale::{ShrutiId, ShrutiScale, SHRUTI_COUNT};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_PAKAD_BONUS: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ascending,
    Descending,
}

impl Direction {
    /// Direction of the move `from -> to`; a repeated pitch counts as ascending.
    pub fn of_move(from_cents: f64, to_cents: f64) -> Direction {
        if to_cents >= from_cents {
            Direction::Ascending
        } else {
            Direction::Descending
        }
    }

    pub fn flip(self) -> Direction {
        match self {
            Direction::Ascending => Direction::Descending,
            Direction::Descending => Direction::Ascending,
        }
    }
}

pub type Edge = (ShrutiId, ShrutiId);

/// A validated raga grammar.
///
/// Edge sets are pitch-consistent: ascent edges never move down, descent edges never
/// move up, and a repeated note allowed in descent is also allowed in ascent. Under
/// that rule any edge taken under either direction also passes the
/// gradient-inferred compliance check.
#[derive(Debug, Clone)]
pub struct RagaSpec {
    name: String,
    scale: ShrutiScale,
    active: Vec<ShrutiId>,
    rank: [Option<u8>; SHRUTI_COUNT],
    ascent: BTreeSet<Edge>,
    descent: BTreeSet<Edge>,
    pakad: Vec<Vec<ShrutiId>>,
    pakad_bigrams: HashSet<Edge>,
    vadi: ShrutiId,
    samvadi: ShrutiId,
    alpha: f64,
    pakad_bonus_factor: f64,
}

/// Builder-style input for [`RagaSpec::new`].
#[derive(Debug, Clone)]
pub struct RagaParts {
    pub name: String,
    pub scale: ShrutiScale,
    pub active: Vec<ShrutiId>,
    pub ascent_edges: Vec<Edge>,
    pub descent_edges: Vec<Edge>,
    pub pakad: Vec<Vec<ShrutiId>>,
    pub vadi: ShrutiId,
    pub samvadi: ShrutiId,
    pub alpha: f64,
    pub pakad_bonus_factor: f64,
}

impl RagaSpec {
    pub fn new(parts: RagaParts) -> Result<Self> {
        Self::build(parts, true)
    }

    /// Skips the non-degeneracy check (every state having in/out edges in both
    /// directions). Only used to exercise dead-end handling downstream.
    #[doc(hidden)]
    pub fn new_allow_dead_ends(parts: RagaParts) -> Result<Self> {
        Self::build(parts, false)
    }

    fn build(parts: RagaParts, require_non_degenerate: bool) -> Result<Self> {
        let RagaParts {
            name,
            scale,
            mut active,
            ascent_edges,
            descent_edges,
            pakad,
            vadi,
            samvadi,
            alpha,
            pakad_bonus_factor,
        } = parts;
        let err = |msg: String| Error::RagaConfig(format!("{name}: {msg}"));

        if active.len() < 2 {
            return Err(err("needs at least two active shrutis".into()));
        }
        if let Some(bad) = active.iter().find(|s| s.index() >= scale.len()) {
            return Err(err(format!("shruti {bad} is outside the scale")));
        }
        active.sort();
        active.dedup();

        let mut rank = [None; SHRUTI_COUNT];
        for (r, s) in active.iter().enumerate() {
            rank[s.index()] = Some(r as u8);
        }
        let is_active = |s: ShrutiId| rank[s.index()].is_some();

        for (label, edges) in [("ascent", &ascent_edges), ("descent", &descent_edges)] {
            for &(a, b) in edges {
                if !is_active(a) || !is_active(b) {
                    return Err(err(format!("{label} edge {a}->{b} uses an inactive shruti")));
                }
            }
        }
        for &(a, b) in &ascent_edges {
            if scale.cents_of(b) < scale.cents_of(a) {
                return Err(err(format!("ascent edge {a}->{b} moves down in pitch")));
            }
        }
        for &(a, b) in &descent_edges {
            if scale.cents_of(b) > scale.cents_of(a) {
                return Err(err(format!("descent edge {a}->{b} moves up in pitch")));
            }
            if a == b && !ascent_edges.contains(&(a, b)) {
                return Err(err(format!("repeat {a}->{a} is allowed in descent but not in ascent")));
            }
        }

        let ascent: BTreeSet<Edge> = ascent_edges.into_iter().collect();
        let descent: BTreeSet<Edge> = descent_edges.into_iter().collect();

        if require_non_degenerate {
            for (label, edges) in [("ascent", &ascent), ("descent", &descent)] {
                for &s in &active {
                    if !edges.iter().any(|&(a, _)| a == s) {
                        return Err(err(format!("shruti {s} has no outgoing {label} edge")));
                    }
                    if !edges.iter().any(|&(_, b)| b == s) {
                        return Err(err(format!("shruti {s} has no incoming {label} edge")));
                    }
                }
            }
        }

        if !is_active(vadi) || !is_active(samvadi) {
            return Err(err("vadi and samvadi must be active".into()));
        }
        if vadi == samvadi {
            return Err(err("vadi and samvadi must differ".into()));
        }
        let mut pakad_bigrams = HashSet::new();
        for motif in &pakad {
            if motif.len() < 2 {
                return Err(err("pakad motifs need at least two notes".into()));
            }
            if let Some(bad) = motif.iter().find(|s| !is_active(**s)) {
                return Err(err(format!("pakad uses inactive shruti {bad}")));
            }
            for w in motif.windows(2) {
                pakad_bigrams.insert((w[0], w[1]));
            }
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(err(format!("alpha must be >= 0, got {alpha}")));
        }
        if !(pakad_bonus_factor.is_finite() && pakad_bonus_factor > 1.0) {
            return Err(err(format!("pakad_bonus_factor must be > 1, got {pakad_bonus_factor}")));
        }

        Ok(RagaSpec {
            name,
            scale,
            active,
            rank,
            ascent,
            descent,
            pakad,
            pakad_bigrams,
            vadi,
            samvadi,
            alpha,
            pakad_bonus_factor,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scale(&self) -> &ShrutiScale {
        &self.scale
    }

    /// Active Shrutis in ascending pitch order.
    pub fn active(&self) -> &[ShrutiId] {
        &self.active
    }

    pub fn num_active(&self) -> usize {
        self.active.len()
    }

    pub fn is_active(&self, s: ShrutiId) -> bool {
        s.index() < SHRUTI_COUNT && self.rank[s.index()].is_some()
    }

    /// Position of `s` within the sorted active set.
    pub fn rank(&self, s: ShrutiId) -> Option<usize> {
        self.rank.get(s.index()).copied().flatten().map(usize::from)
    }

    pub fn edges(&self, dir: Direction) -> &BTreeSet<Edge> {
        match dir {
            Direction::Ascending => &self.ascent,
            Direction::Descending => &self.descent,
        }
    }

    pub fn pakad(&self) -> &[Vec<ShrutiId>] {
        &self.pakad
    }

    pub fn vadi(&self) -> ShrutiId {
        self.vadi
    }

    pub fn samvadi(&self) -> ShrutiId {
        self.samvadi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn pakad_bonus_factor(&self) -> f64 {
        self.pakad_bonus_factor
    }

    pub fn cents_of(&self, s: ShrutiId) -> f64 {
        self.scale.cents_of(s)
    }

    pub fn is_pakad_bigram(&self, from: ShrutiId, to: ShrutiId) -> bool {
        self.pakad_bigrams.contains(&(from, to))
    }

    fn check_active(&self, s: ShrutiId) -> Result<usize> {
        self.rank(s).ok_or_else(|| Error::InvalidState(s.index(), self.name.clone()))
    }

    /// Grammar indicator: is `from -> to` in the edge set for `dir`?
    pub fn allowed(&self, from: ShrutiId, to: ShrutiId, dir: Direction) -> Result<bool> {
        self.check_active(from)?;
        self.check_active(to)?;
        Ok(self.edges(dir).contains(&(from, to)))
    }

    /// Like [`allowed`](Self::allowed), but inactive states are simply not allowed.
    pub fn allows(&self, from: ShrutiId, to: ShrutiId, dir: Direction) -> bool {
        self.edges(dir).contains(&(from, to))
    }

    /// Scale-step distance between two active Shrutis.
    pub fn step_distance(&self, from: ShrutiId, to: ShrutiId) -> Result<usize> {
        let a = self.check_active(from)?;
        let b = self.check_active(to)?;
        Ok(a.abs_diff(b))
    }

    /// Unnormalized weight `G * exp(-alpha * d) * bonus`, zero for forbidden moves.
    pub fn transition_weight(&self, from: ShrutiId, to: ShrutiId, dir: Direction) -> Result<f64> {
        let d = self.step_distance(from, to)?;
        if !self.allows(from, to, dir) {
            return Ok(0.0);
        }
        let bonus = if self.is_pakad_bigram(from, to) { self.pakad_bonus_factor } else { 1.0 };
        Ok((-self.alpha * d as f64).exp() * bonus)
    }

    /// Row-normalized transition weights over the active set, indexed by rank.
    /// A row with no allowed successor becomes a self-loop with probability 1.
    pub fn normalized_transitions(&self, dir: Direction) -> Vec<Vec<f64>> {
        let n = self.active.len();
        let mut rows = Vec::with_capacity(n);
        for (i, &from) in self.active.iter().enumerate() {
            let mut row: Vec<f64> =
                self.active.iter().map(|&to| self.transition_weight(from, to, dir).unwrap_or(0.0)).collect();
            let z: f64 = row.iter().sum();
            if z > 0.0 {
                row.iter_mut().for_each(|w| *w /= z);
            } else {
                row[i] = 1.0;
            }
            rows.push(row);
        }
        rows
    }

    /// Copy of this grammar with one edge removed (no re-validation of degeneracy).
    pub fn without_edge(&self, edge: Edge, dir: Direction) -> RagaSpec {
        let mut out = self.clone();
        match dir {
            Direction::Ascending => out.ascent.remove(&edge),
            Direction::Descending => out.descent.remove(&edge),
        };
        out
    }
}

/// Fraction of consecutive pairs that are allowed under the direction implied by
/// their own pitches. Sequences shorter than two notes score 1.
pub fn grammar_compliance(seq: &[ShrutiId], raga: &RagaSpec) -> f64 {
    if seq.len() < 2 {
        return 1.0;
    }
    let ok = seq
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0], w[1]);
            raga.is_active(a)
                && raga.is_active(b)
                && raga.allows(a, b, Direction::of_move(raga.cents_of(a), raga.cents_of(b)))
        })
        .count();
    ok as f64 / (seq.len() - 1) as f64
}

/// Fraction of the raga's pakad motifs found verbatim as contiguous runs in `seq`.
pub fn pakad_recognition(seq: &[ShrutiId], raga: &RagaSpec) -> f64 {
    let motifs = raga.pakad();
    if motifs.is_empty() {
        return 1.0;
    }
    let found = motifs.iter().filter(|m| seq.windows(m.len()).any(|w| w == m.as_slice())).count();
    found as f64 / motifs.len() as f64
}

/// On-disk raga definition.
///
/// Edges default to adjacent steps of the active set (upward in ascent, downward in
/// descent). `arohana`/`avarohana` override those step chains, `*_leaps` add
/// characteristic skips, and `repeats` lists notes that may be held.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RagaConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub active: Vec<usize>,
    #[serde(default)]
    pub arohana: Option<Vec<usize>>,
    #[serde(default)]
    pub avarohana: Option<Vec<usize>>,
    #[serde(default)]
    pub ascent_leaps: Vec<[usize; 2]>,
    #[serde(default)]
    pub descent_leaps: Vec<[usize; 2]>,
    #[serde(default)]
    pub repeats: Vec<usize>,
    #[serde(default)]
    pub pakad: Vec<Vec<usize>>,
    pub vadi: usize,
    pub samvadi: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_bonus")]
    pub pakad_bonus_factor: f64,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_bonus() -> f64 {
    DEFAULT_PAKAD_BONUS
}

fn ids(raw: &[usize]) -> Result<Vec<ShrutiId>> {
    raw.iter().map(|&i| ShrutiId::new(i).map_err(|e| Error::RagaConfig(e.to_string()))).collect()
}

impl RagaConfig {
    pub fn into_spec(self) -> Result<RagaSpec> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::RagaConfig(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(7..=10).contains(&self.active.len()) {
            return Err(Error::RagaConfig(format!(
                "{}: expected 7 to 10 active shrutis, got {}",
                self.name,
                self.active.len()
            )));
        }
        let mut active = ids(&self.active)?;
        active.sort();
        let arohana = match &self.arohana {
            Some(a) => ids(a)?,
            None => active.clone(),
        };
        let avarohana = match &self.avarohana {
            Some(a) => ids(a)?,
            None => active.iter().rev().copied().collect(),
        };
        let mut ascent: Vec<Edge> = arohana.windows(2).map(|w| (w[0], w[1])).collect();
        let mut descent: Vec<Edge> = avarohana.windows(2).map(|w| (w[0], w[1])).collect();
        for [a, b] in &self.ascent_leaps {
            ascent.push((
                ShrutiId::new(*a).map_err(|e| Error::RagaConfig(e.to_string()))?,
                ShrutiId::new(*b).map_err(|e| Error::RagaConfig(e.to_string()))?,
            ));
        }
        for [a, b] in &self.descent_leaps {
            descent.push((
                ShrutiId::new(*a).map_err(|e| Error::RagaConfig(e.to_string()))?,
                ShrutiId::new(*b).map_err(|e| Error::RagaConfig(e.to_string()))?,
            ));
        }
        for s in ids(&self.repeats)? {
            ascent.push((s, s));
            descent.push((s, s));
        }
        let pakad = self.pakad.iter().map(|m| ids(m)).collect::<Result<Vec<_>>>()?;
        if let Some(m) = pakad.iter().find(|m| !(3..=6).contains(&m.len())) {
            return Err(Error::RagaConfig(format!(
                "{}: pakad motifs must have 3 to 6 notes, got {}",
                self.name,
                m.len()
            )));
        }
        RagaSpec::new(RagaParts {
            name: self.name,
            scale: ShrutiScale::default(),
            active,
            ascent_edges: ascent,
            descent_edges: descent,
            pakad,
            vadi: ShrutiId::new(self.vadi).map_err(|e| Error::RagaConfig(e.to_string()))?,
            samvadi: ShrutiId::new(self.samvadi).map_err(|e| Error::RagaConfig(e.to_string()))?,
            alpha: self.alpha,
            pakad_bonus_factor: self.pakad_bonus_factor,
        })
    }
}

/// Parse and validate a raga definition in TOML.
pub fn load_raga(source: &str) -> Result<RagaSpec> {
    let cfg: RagaConfig = toml::from_str(source).map_err(|e| Error::RagaConfig(e.message().to_string()))?;
    cfg.into_spec()
}

const BUILTIN: [(&str, &str); 5] = [
    ("yaman", include_str!("../data/ragas/yaman.toml")),
    ("bhairavi", include_str!("../data/ragas/bhairavi.toml")),
    ("bilaval", include_str!("../data/ragas/bilaval.toml")),
    ("kalyan", include_str!("../data/ragas/kalyan.toml")),
    ("khamaaj", include_str!("../data/ragas/khamaaj.toml")),
];

/// Names of the shipped raga definitions.
pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

/// Raw TOML of a shipped raga definition.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    let key = name.to_ascii_lowercase();
    BUILTIN.iter().find(|(n, _)| *n == key).map(|(_, s)| *s)
}

/// Load one of the shipped ragas by (case-insensitive) name.
pub fn builtin(name: &str) -> Result<RagaSpec> {
    let src = builtin_source(name).ok_or_else(|| Error::RagaConfig(format!("unknown raga `{name}`")))?;
    load_raga(src)
}
