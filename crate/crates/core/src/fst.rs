//! Shruti-aware weighted transducer.
//!
//! Correction searches a lattice whose columns are observation positions and whose
//! nodes are "last emitted Shruti" (the raga's active states, plus a start node).
//! Each arc is one edit operation scored as
//! `lambda_pitch * c_pitch + lambda_grammar * c_grammar + lambda_edit * c_edit`,
//! higher is better. Grammar-forbidden arcs are never materialized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::infer_direction;
use crate::raga::{Direction, RagaSpec};
use crate::scale::{circular_distance, ShrutiId, OCTAVE_CENTS};
use crate::sequence::{Observation, PitchSequence};

/// Cents corresponding to one unit of pitch cost.
pub const PITCH_SCALE_CENTS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub lambda_pitch: f64,
    pub lambda_grammar: f64,
    pub lambda_edit: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights { lambda_pitch: 0.6, lambda_grammar: 0.3, lambda_edit: 0.1 }
    }
}

impl CostWeights {
    pub fn new(lambda_pitch: f64, lambda_grammar: f64, lambda_edit: f64) -> Result<Self> {
        let w = CostWeights { lambda_pitch, lambda_grammar, lambda_edit };
        if [lambda_pitch, lambda_grammar, lambda_edit].iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::InvalidInput(format!("cost weights must be >= 0: {w:?}")));
        }
        Ok(w)
    }
}

/// Transducer settings beyond the three blend weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FstParams {
    pub weights: CostWeights,
    /// Magnitude of `c_edit` for every non-match operation.
    pub edit_penalty: f64,
    /// Magnitude of `c_pitch` for INSERT and DELETE, which carry no aligned pitch.
    /// The default is the largest pitch cost an aligned symbol can incur (600 cents).
    pub gap_pitch_penalty: f64,
    /// Longest run of consecutive INSERTs (and, separately, DELETEs).
    pub max_gap_run: usize,
}

impl Default for FstParams {
    fn default() -> Self {
        FstParams {
            weights: CostWeights::default(),
            edit_penalty: 1.0,
            gap_pitch_penalty: OCTAVE_CENTS / 2.0 / PITCH_SCALE_CENTS,
            max_gap_run: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Match,
    Insert,
    Delete,
    Substitute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOp {
    pub kind: EditKind,
    pub obs_index: Option<usize>,
    pub state: Option<ShrutiId>,
}

impl EditOp {
    pub fn matched(t: usize, s: ShrutiId) -> Self {
        EditOp { kind: EditKind::Match, obs_index: Some(t), state: Some(s) }
    }

    pub fn substitute(t: usize, s: ShrutiId) -> Self {
        EditOp { kind: EditKind::Substitute, obs_index: Some(t), state: Some(s) }
    }

    pub fn insert(s: ShrutiId) -> Self {
        EditOp { kind: EditKind::Insert, obs_index: None, state: Some(s) }
    }

    pub fn delete(t: usize) -> Self {
        EditOp { kind: EditKind::Delete, obs_index: Some(t), state: None }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            EditKind::Match | EditKind::Substitute => self.obs_index.is_some() && self.state.is_some(),
            EditKind::Insert => self.obs_index.is_none() && self.state.is_some(),
            EditKind::Delete => self.obs_index.is_some() && self.state.is_none(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("inconsistent edit op {self:?}")))
        }
    }
}

/// The transducer for one raga: grammar plus normalized log transition tables.
#[derive(Debug, Clone)]
pub struct ShrutiFst {
    raga: RagaSpec,
    params: FstParams,
    /// `ln P(to | from)` flattened as `from * n + to`, with an extra row for the
    /// start node (all zeros); forbidden arcs are `-inf`.
    arcs_up: Vec<f64>,
    arcs_down: Vec<f64>,
    prob_up: Vec<Vec<f64>>,
    prob_down: Vec<Vec<f64>>,
}

impl ShrutiFst {
    pub fn new(raga: &RagaSpec, params: FstParams) -> Result<Self> {
        CostWeights::new(
            params.weights.lambda_pitch,
            params.weights.lambda_grammar,
            params.weights.lambda_edit,
        )?;
        if !(params.edit_penalty >= 0.0 && params.gap_pitch_penalty >= 0.0) {
            return Err(Error::InvalidInput("penalties must be >= 0".into()));
        }
        let prob_up = raga.normalized_transitions(Direction::Ascending);
        let prob_down = raga.normalized_transitions(Direction::Descending);
        let arcs = |m: &Vec<Vec<f64>>, dir: Direction| -> Vec<f64> {
            let act = raga.active();
            let mut out = Vec::with_capacity((act.len() + 1) * act.len());
            for (i, row) in m.iter().enumerate() {
                for (j, &p) in row.iter().enumerate() {
                    let legal = p > 0.0 && raga.allows(act[i], act[j], dir);
                    out.push(if legal { p.ln() } else { f64::NEG_INFINITY });
                }
            }
            out.extend(std::iter::repeat_n(0.0, act.len()));
            out
        };
        Ok(ShrutiFst {
            arcs_up: arcs(&prob_up, Direction::Ascending),
            arcs_down: arcs(&prob_down, Direction::Descending),
            prob_up,
            prob_down,
            raga: raga.clone(),
            params,
        })
    }

    pub fn with_defaults(raga: &RagaSpec) -> Self {
        Self::new(raga, FstParams::default()).expect("default params are valid")
    }

    pub fn raga(&self) -> &RagaSpec {
        &self.raga
    }

    pub fn params(&self) -> &FstParams {
        &self.params
    }

    /// Lattice width: active states plus the epsilon (deletion) column.
    pub fn lattice_width(&self) -> usize {
        self.raga.num_active() + 1
    }

    fn arcs(&self, dir: Direction) -> &[f64] {
        match dir {
            Direction::Ascending => &self.arcs_up,
            Direction::Descending => &self.arcs_down,
        }
    }

    /// Normalized probability of `from -> to` under `dir` (0 when forbidden).
    pub fn transition_prob(&self, from: ShrutiId, to: ShrutiId, dir: Direction) -> f64 {
        if !self.raga.allows(from, to, dir) {
            return 0.0;
        }
        let (i, j) = (self.raga.rank(from).unwrap(), self.raga.rank(to).unwrap());
        match dir {
            Direction::Ascending => self.prob_up[i][j],
            Direction::Descending => self.prob_down[i][j],
        }
    }

    /// Grammar cost `ln P(to | from, dir)`; `None` when the move is forbidden.
    fn grammar_cost(&self, from: Option<usize>, to: usize, dir: Direction) -> Option<f64> {
        let n = self.raga.num_active();
        let g = self.arcs(dir)[from.unwrap_or(n) * n + to];
        (g > f64::NEG_INFINITY).then_some(g)
    }

    /// Rank of the observed Shruti (nearest on the full table) when it is active.
    /// Emitting that state is a MATCH; emitting any other state is a SUBSTITUTE.
    fn observed_rank(&self, cents: f64) -> Result<Option<usize>> {
        let (id, _) = self.raga.scale().nearest(cents)?;
        Ok(self.raga.rank(id))
    }

    /// Nearest active Shruti (by rank) to an observation, ties to the lower pitch.
    pub fn nearest_active_rank(&self, cents: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (r, &s) in self.raga.active().iter().enumerate() {
            let d = circular_distance(cents, self.raga.cents_of(s));
            if d < best_d {
                best_d = d;
                best = r;
            }
        }
        best
    }

    /// Score of one edit operation, or `None` when the arc is grammar-forbidden.
    pub fn op_cost(
        &self,
        op: &EditOp,
        obs: Option<f64>,
        prev_state: Option<ShrutiId>,
        dir: Direction,
    ) -> Result<Option<f64>> {
        op.validate()?;
        let w = &self.params.weights;
        let rank_of = |s: ShrutiId| {
            self.raga.rank(s).ok_or_else(|| Error::InvalidState(s.index(), self.raga.name().to_string()))
        };
        let prev = prev_state.map(rank_of).transpose()?;
        let edit = match op.kind {
            EditKind::Match => 0.0,
            _ => -self.params.edit_penalty,
        };
        let (pitch, grammar) = match op.kind {
            EditKind::Match | EditKind::Substitute => {
                let o = obs
                    .filter(|o| o.is_finite())
                    .ok_or_else(|| Error::InvalidInput(format!("{:?} needs an observation", op.kind)))?;
                let s = rank_of(op.state.unwrap())?;
                let is_match = self.observed_rank(o)? == Some(s);
                if is_match != (op.kind == EditKind::Match) {
                    return Err(Error::InvalidInput(format!(
                        "{:?} of {} does not fit observation {o}",
                        op.kind,
                        op.state.unwrap()
                    )));
                }
                let d = circular_distance(o, self.raga.cents_of(op.state.unwrap()));
                match self.grammar_cost(prev, s, dir) {
                    Some(g) => (-d / PITCH_SCALE_CENTS, g),
                    None => return Ok(None),
                }
            }
            EditKind::Insert => {
                let s = rank_of(op.state.unwrap())?;
                match self.grammar_cost(prev, s, dir) {
                    Some(g) => (-self.params.gap_pitch_penalty, g),
                    None => return Ok(None),
                }
            }
            EditKind::Delete => (-self.params.gap_pitch_penalty, 0.0),
        };
        Ok(Some(w.lambda_pitch * pitch + w.lambda_grammar * grammar + w.lambda_edit * edit))
    }

    /// Build the scoring lattice for a fully observed sequence.
    pub fn lattice(&self, seq: &PitchSequence) -> Result<Lattice> {
        let cents = seq.observed_cents()?;
        let n = self.raga.num_active();
        let w = &self.params.weights;
        let mut emit = Vec::with_capacity(cents.len() * n);
        let mut nearest = Vec::with_capacity(cents.len());
        for &o in &cents {
            let near = self.observed_rank(o)?;
            nearest.push(near);
            emit.extend((0..n).map(|s| {
                let d = circular_distance(o, self.raga.cents_of(self.raga.active()[s]));
                let edit = if Some(s) == near { 0.0 } else { -self.params.edit_penalty };
                w.lambda_pitch * (-d / PITCH_SCALE_CENTS) + w.lambda_edit * edit
            }));
        }
        let gap = w.lambda_pitch * -self.params.gap_pitch_penalty + w.lambda_edit * -self.params.edit_penalty;
        Ok(Lattice { dirs: infer_direction(seq), len: cents.len(), emit, nearest, gap, width: n + 1 })
    }

    /// Best-scoring edit path; see [`FstCorrection`].
    pub fn correct(&self, seq: &PitchSequence) -> Result<FstCorrection> {
        let lattice = self.lattice(seq)?;
        self.search(&lattice)
    }

    /// Dynamic program over (position, last emitted state, gap-run mode).
    ///
    /// Node `m * (n + 1) + q` is mode `m` (0 plain, `1..=runs` deleting,
    /// `runs+1..=2*runs` inserting) with `q` the last emitted rank, or `n` when
    /// nothing has been emitted yet.
    pub fn search(&self, lat: &Lattice) -> Result<FstCorrection> {
        let n = self.raga.num_active();
        let start = n;
        let nodes = n + 1;
        let len = lat.len;
        let runs = self.params.max_gap_run;
        let modes = 1 + 2 * runs;
        let width = modes * nodes;
        let ins = |k: usize| runs + k;
        let lg = self.params.weights.lambda_grammar;
        let weighted = |dir: Direction| -> Vec<f64> {
            self.arcs(dir).iter().map(|&g| if g > f64::NEG_INFINITY { lg * g } else { g }).collect()
        };
        let (arcs_up, arcs_down) = (weighted(Direction::Ascending), weighted(Direction::Descending));

        let mut score = vec![f64::NEG_INFINITY; (len + 1) * width];
        let mut back = vec![NO_BACK; (len + 1) * width];
        score[start] = 0.0;

        for t in 0..=len {
            let arcs = match lat.dirs[t.min(len - 1)] {
                Direction::Ascending => &arcs_up,
                Direction::Descending => &arcs_down,
            };
            let col = t * width;
            // insert arcs within column t
            for k in 1..=runs {
                let src_modes = if k == 1 { 0..runs + 1 } else { ins(k - 1)..ins(k - 1) + 1 };
                let target = col + ins(k) * nodes;
                for m in src_modes {
                    for q in 0..nodes {
                        let src = col + m * nodes + q;
                        let v = score[src];
                        if v == f64::NEG_INFINITY {
                            continue;
                        }
                        let row = &arcs[q * n..q * n + n];
                        for s in 0..n {
                            let c = v + lat.gap + row[s];
                            if c > score[target + s] {
                                score[target + s] = c;
                                back[target + s] = src as u32;
                            }
                        }
                    }
                }
            }
            if t == len {
                break;
            }
            // consuming arcs: column t -> t + 1
            let next = col + width;
            let emit = &lat.emit[t * n..t * n + n];
            for m in 0..modes {
                let del_mode = if (1..runs).contains(&m) {
                    Some(m + 1)
                } else if runs > 0 && (m == 0 || m > runs) {
                    Some(1)
                } else {
                    None
                };
                for q in 0..nodes {
                    let src = col + m * nodes + q;
                    let v = score[src];
                    if v == f64::NEG_INFINITY {
                        continue;
                    }
                    let row = &arcs[q * n..q * n + n];
                    for s in 0..n {
                        let c = v + emit[s] + row[s];
                        if c > score[next + s] {
                            score[next + s] = c;
                            back[next + s] = src as u32;
                        }
                    }
                    // delete keeps the last emitted state
                    if let Some(dm) = del_mode {
                        let c = v + lat.gap;
                        let target = next + dm * nodes + q;
                        if c > score[target] {
                            score[target] = c;
                            back[target] = src as u32;
                        }
                    }
                }
            }
        }

        let last = len * width;
        let mut best = None;
        let mut best_score = f64::NEG_INFINITY;
        for m in 0..modes {
            for q in 0..n {
                let v = score[last + m * nodes + q];
                if v > best_score {
                    best_score = v;
                    best = Some(last + m * nodes + q);
                }
            }
        }
        let mut at =
            best.ok_or_else(|| Error::InvalidInput("no grammar-legal path through the lattice".into()))?;
        let mut ops = Vec::new();
        while back[at] != NO_BACK {
            let (col, node) = (at / width, at % width);
            let (m, q) = (node / nodes, node % nodes);
            ops.push(if m == 0 {
                let state = self.raga.active()[q];
                if Some(q) == lat.nearest[col - 1] {
                    EditOp::matched(col - 1, state)
                } else {
                    EditOp::substitute(col - 1, state)
                }
            } else if m <= runs {
                EditOp::delete(col - 1)
            } else {
                EditOp::insert(self.raga.active()[q])
            });
            at = back[at] as usize;
        }
        ops.reverse();
        Ok(FstCorrection::from_ops(ops, best_score, len))
    }
}

const NO_BACK: u32 = u32::MAX;

/// Per-sequence arc costs shared by every path through the lattice.
#[derive(Debug, Clone)]
pub struct Lattice {
    dirs: Vec<Direction>,
    len: usize,
    /// `lambda_pitch * c_pitch + lambda_edit * c_edit` for emitting state `s`
    /// at position `t`, stored at `t * n + s`.
    emit: Vec<f64>,
    /// Rank of the observed Shruti at each position, if it is active.
    nearest: Vec<Option<usize>>,
    /// Pitch and edit part of an INSERT or DELETE arc.
    gap: f64,
    width: usize,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of candidate symbols per column (states plus epsilon).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn directions(&self) -> &[Direction] {
        &self.dirs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FstCorrection {
    /// Emitted Shruti string (INSERTs add symbols, DELETEs drop them).
    pub output: Vec<ShrutiId>,
    pub ops: Vec<EditOp>,
    pub score: f64,
    /// One label per input position. A deleted position takes the first state
    /// inserted right after it, else the last state emitted before it, else the
    /// next one emitted.
    pub aligned: Vec<ShrutiId>,
}

impl FstCorrection {
    fn from_ops(ops: Vec<EditOp>, score: f64, len: usize) -> Self {
        let output: Vec<ShrutiId> = ops.iter().filter_map(|op| op.state).collect();
        let mut aligned: Vec<Option<ShrutiId>> = vec![None; len];
        let mut last: Option<ShrutiId> = None;
        let mut pending: Vec<usize> = Vec::new();
        for op in &ops {
            match op.kind {
                EditKind::Match | EditKind::Substitute => {
                    aligned[op.obs_index.unwrap()] = op.state;
                    pending.clear();
                    last = op.state;
                }
                EditKind::Delete => pending.push(op.obs_index.unwrap()),
                EditKind::Insert => {
                    for t in pending.drain(..) {
                        aligned[t] = op.state;
                    }
                    last = op.state;
                }
            }
            if op.kind == EditKind::Delete {
                if let Some(s) = last {
                    aligned[op.obs_index.unwrap()] = Some(s);
                }
            }
        }
        // leading deletes with nothing emitted before them
        let first = output.first().copied();
        let aligned = aligned
            .into_iter()
            .map(|a| a.or(first).expect("a successful search emits at least one state"))
            .collect();
        FstCorrection { output, ops, score, aligned }
    }
}

/// Correct a fully observed sequence with default transducer settings.
pub fn fst_correct(seq: &PitchSequence, raga: &RagaSpec, weights: CostWeights) -> Result<FstCorrection> {
    let fst = ShrutiFst::new(raga, FstParams { weights, ..FstParams::default() })?;
    fst.correct(seq)
}

/// Settings for context-window completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionParams {
    pub base_weight: f64,
    pub pakad_bonus: f64,
    pub position_bonus: f64,
    pub tala_cycle: usize,
    pub strong_beats: Vec<usize>,
    pub max_sweeps: usize,
}

impl Default for CompletionParams {
    fn default() -> Self {
        CompletionParams {
            base_weight: 1.0,
            pakad_bonus: 1.0,
            position_bonus: 0.5,
            tala_cycle: 16,
            strong_beats: vec![0, 4, 8, 12],
            max_sweeps: 3,
        }
    }
}

/// Up to three resolved notes around a gap: two before, one after.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Context {
    pub prev2: Option<ShrutiId>,
    pub prev: Option<ShrutiId>,
    pub next: Option<ShrutiId>,
}

impl ShrutiFst {
    fn move_prob(&self, from: ShrutiId, to: ShrutiId) -> f64 {
        let dir = Direction::of_move(self.raga.cents_of(from), self.raga.cents_of(to));
        self.transition_prob(from, to, dir)
    }

    fn completes_pakad(&self, cand: ShrutiId, ctx: &Context) -> bool {
        let mut grams: Vec<Vec<ShrutiId>> = Vec::new();
        if let Some(p) = ctx.prev {
            grams.push(vec![p, cand]);
            if let Some(p2) = ctx.prev2 {
                grams.push(vec![p2, p, cand]);
            }
            if let Some(nx) = ctx.next {
                grams.push(vec![p, cand, nx]);
            }
        }
        if let Some(nx) = ctx.next {
            grams.push(vec![cand, nx]);
        }
        grams.iter().any(|g| self.raga.pakad().iter().any(|m| m.windows(g.len()).any(|w| w == g.as_slice())))
    }

    /// `w_base + w_transition + w_pakad + w_position` for one candidate.
    ///
    /// `w_transition` adds the normalized probability of each legal move to and from
    /// the immediate neighbours; forbidden moves contribute nothing.
    pub fn candidate_score(
        &self,
        cand: ShrutiId,
        ctx: &Context,
        position: usize,
        params: &CompletionParams,
    ) -> f64 {
        let base = if self.raga.is_active(cand) { params.base_weight } else { 0.0 };
        let mut transition = 0.0;
        if let Some(p) = ctx.prev {
            transition += self.move_prob(p, cand);
        }
        if let Some(nx) = ctx.next {
            transition += self.move_prob(cand, nx);
        }
        let pakad = if self.completes_pakad(cand, ctx) { params.pakad_bonus } else { 0.0 };
        let strong = params.tala_cycle > 0 && params.strong_beats.contains(&(position % params.tala_cycle));
        let emphasized = cand == self.raga.vadi() || cand == self.raga.samvadi();
        let pos = if strong && emphasized { params.position_bonus } else { 0.0 };
        base + transition + pakad + pos
    }

    /// Fill MISSING positions by context scoring; observed positions are quantized.
    pub fn complete(&self, seq: &PitchSequence, params: &CompletionParams) -> Result<Vec<ShrutiId>> {
        if seq.all_missing() {
            return Err(Error::InvalidInput(
                "every observation is MISSING; nothing to anchor completion".into(),
            ));
        }
        let active = self.raga.active();
        let len = seq.len();
        let mut labels: Vec<Option<ShrutiId>> =
            seq.items().iter().map(|o| o.cents().map(|c| active[self.nearest_active_rank(c)])).collect();

        // Observed notes illegal with both observed neighbours move to the closest
        // active note that is legal with both, if there is one.
        let quantized = labels.clone();
        for t in 1..len.saturating_sub(1) {
            let (Some(l), Some(s), Some(r), Observation::Cents(c)) =
                (quantized[t - 1], quantized[t], quantized[t + 1], seq.get(t))
            else {
                continue;
            };
            let legal = |x: ShrutiId| self.move_prob(l, x) > 0.0 && self.move_prob(x, r) > 0.0;
            if self.move_prob(l, s) == 0.0 && self.move_prob(s, r) == 0.0 {
                if let Some(&alt) = active.iter().filter(|&&x| legal(x)).min_by(|&&a, &&b| {
                    circular_distance(c, self.raga.cents_of(a))
                        .total_cmp(&circular_distance(c, self.raga.cents_of(b)))
                }) {
                    labels[t] = Some(alt);
                }
            }
        }

        let missing = seq.missing_positions();
        for sweep in 0..params.max_sweeps.max(1) {
            let order: Vec<usize> =
                if sweep % 2 == 0 { missing.clone() } else { missing.iter().rev().copied().collect() };
            let mut changed = false;
            for t in order {
                let ctx = Context {
                    prev2: if t >= 2 { labels[t - 2] } else { None },
                    prev: if t >= 1 { labels[t - 1] } else { None },
                    next: labels.get(t + 1).copied().flatten(),
                };
                // Prefer candidates legal with every resolved neighbour.
                let fits = |c: ShrutiId| {
                    ctx.prev.is_none_or(|p| self.move_prob(p, c) > 0.0)
                        && ctx.next.is_none_or(|n| self.move_prob(c, n) > 0.0)
                };
                let legal: Vec<ShrutiId> = active.iter().copied().filter(|&c| fits(c)).collect();
                let pool = if legal.is_empty() { active } else { &legal[..] };
                let mut best = pool[0];
                let mut best_score = f64::NEG_INFINITY;
                for &cand in pool {
                    let sc = self.candidate_score(cand, &ctx, t, params);
                    if sc > best_score {
                        best_score = sc;
                        best = cand;
                    }
                }
                if labels[t] != Some(best) {
                    labels[t] = Some(best);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(labels.into_iter().map(|l| l.expect("all positions resolved")).collect())
    }
}

/// Complete a sequence with MISSING markers using context scoring.
pub fn fst_complete(
    seq: &PitchSequence,
    raga: &RagaSpec,
    weights: CostWeights,
    params: &CompletionParams,
) -> Result<Vec<ShrutiId>> {
    let fst = ShrutiFst::new(raga, FstParams { weights, ..FstParams::default() })?;
    fst.complete(seq, params)
}
