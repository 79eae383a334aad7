//! Brute-force reference implementations and random instance builders shared by
//! the integration tests.
#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shruti_core::hmm::infer_direction;
use shruti_core::raga::RagaParts;
use shruti_core::{
    CostWeights, Direction, EditKind, EditOp, FstParams, HmmModel, Observation, PitchSequence, RagaSpec,
    ShrutiFst, ShrutiId, ShrutiScale,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random pitch-consistent grammar over `k` Shrutis with both directions non-degenerate.
pub fn random_raga(rng: &mut ChaCha8Rng, k: usize) -> RagaSpec {
    let mut ids: Vec<usize> = sample(rng, 22, k).into_vec();
    ids.sort();
    let act: Vec<ShrutiId> = ids.iter().map(|&i| ShrutiId::new(i).unwrap()).collect();
    let mut up = Vec::new();
    let mut down = Vec::new();
    let mut loops = vec![false; k];
    for i in 0..k {
        loops[i] = i == 0 || i == k - 1 || rng.random_bool(0.3);
        if loops[i] {
            up.push((act[i], act[i]));
            if i == 0 || i == k - 1 || rng.random_bool(0.5) {
                down.push((act[i], act[i]));
            }
        }
        for j in i + 1..k {
            if j == i + 1 || rng.random_bool(0.25) {
                up.push((act[i], act[j]));
            }
            if j == i + 1 || rng.random_bool(0.25) {
                down.push((act[j], act[i]));
            }
        }
    }
    let pakad = if k >= 3 && rng.random_bool(0.5) { vec![vec![act[0], act[1], act[2]]] } else { vec![] };
    let vadi = act[rng.random_range(0..k)];
    let samvadi = act[(act.iter().position(|&s| s == vadi).unwrap() + 1) % k];
    RagaSpec::new(RagaParts {
        name: format!("random{k}"),
        scale: ShrutiScale::default(),
        active: act,
        ascent_edges: up,
        descent_edges: down,
        pakad,
        vadi,
        samvadi,
        alpha: rng.random_range(0.05..0.5),
        pakad_bonus_factor: rng.random_range(1.0..2.0),
    })
    .expect("generated grammar is valid")
}

/// Noisy observations around random active notes, with occasional wild values.
pub fn random_cents(rng: &mut ChaCha8Rng, raga: &RagaSpec, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| {
            if rng.random_bool(0.15) {
                rng.random_range(-100.0..1300.0)
            } else {
                let s = raga.active()[rng.random_range(0..raga.num_active())];
                raga.cents_of(s) + rng.random_range(-70.0..70.0)
            }
        })
        .collect()
}

/// Blanks positions at `rate`, always keeping at least one observed value.
pub fn with_gaps(rng: &mut ChaCha8Rng, cents: &[f64], rate: f64) -> PitchSequence {
    let keep = rng.random_range(0..cents.len());
    let items =
        cents
            .iter()
            .enumerate()
            .map(|(t, &c)| {
                if t != keep && rng.random_bool(rate) {
                    Observation::Missing
                } else {
                    Observation::Cents(c)
                }
            })
            .collect();
    PitchSequence::new(items).unwrap()
}

fn ln(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Joint log probability of a rank path under the model, by direct summation.
pub fn path_logprob(model: &HmmModel, seq: &PitchSequence, path: &[usize]) -> f64 {
    let dirs = infer_direction(seq);
    let mut lp = ln(model.pi()[path[0]]);
    for t in 0..path.len() {
        if t > 0 {
            lp += ln(model.transitions(dirs[t])[path[t - 1]][path[t]]);
        }
        if let Observation::Cents(c) = seq.get(t) {
            lp += model.emission_logprob_rank(c, path[t]);
        }
    }
    lp
}

/// Calls `f` on every rank path of length `len` over `n` states.
fn for_each_path(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut path = vec![0usize; len];
    loop {
        f(&path);
        let mut t = len;
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            path[t] += 1;
            if path[t] < n {
                break;
            }
            path[t] = 0;
        }
    }
}

pub struct BruteViterbi {
    pub best: f64,
    pub path: Vec<usize>,
    pub runner_up: f64,
}

pub fn brute_viterbi(model: &HmmModel, seq: &PitchSequence) -> BruteViterbi {
    let mut out = BruteViterbi { best: f64::NEG_INFINITY, path: vec![], runner_up: f64::NEG_INFINITY };
    for_each_path(model.num_states(), seq.len(), |p| {
        let lp = path_logprob(model, seq, p);
        if lp > out.best {
            out.runner_up = out.best;
            out.best = lp;
            out.path = p.to_vec();
        } else if lp > out.runner_up {
            out.runner_up = lp;
        }
    });
    out
}

/// Log likelihood and per-position state marginals by summing over every path.
pub fn brute_marginals(model: &HmmModel, seq: &PitchSequence) -> (f64, Vec<Vec<f64>>) {
    let n = model.num_states();
    let len = seq.len();
    let mut max = f64::NEG_INFINITY;
    for_each_path(n, len, |p| max = max.max(path_logprob(model, seq, p)));
    let mut acc = vec![vec![0.0; n]; len];
    for_each_path(n, len, |p| {
        let w = (path_logprob(model, seq, p) - max).exp();
        for (t, &s) in p.iter().enumerate() {
            acc[t][s] += w;
        }
    });
    let z: f64 = acc[0].iter().sum();
    let marg = acc.into_iter().map(|row| row.into_iter().map(|x| x / z).collect()).collect();
    (max + z.ln(), marg)
}

/// Scores an op path with `op_cost`, checking run limits and that every observation
/// is consumed in order. `None` when the path is illegal.
pub fn rescore_ops(fst: &ShrutiFst, seq: &PitchSequence, ops: &[EditOp]) -> Option<f64> {
    let cents = seq.observed_cents().ok()?;
    let dirs = infer_direction(seq);
    let runs = fst.params().max_gap_run;
    let (mut t, mut prev, mut dels, mut inss, mut total) = (0usize, None, 0usize, 0usize, 0.0);
    for op in ops {
        let dir = dirs[t.min(cents.len() - 1)];
        let obs = op.obs_index.map(|i| cents[i]);
        if op.obs_index.is_some_and(|i| i != t) {
            return None;
        }
        total += fst.op_cost(op, obs, prev, dir).ok()??;
        match op.kind {
            EditKind::Match | EditKind::Substitute => {
                (t, prev, dels, inss) = (t + 1, op.state, 0, 0);
            }
            EditKind::Delete => {
                (t, dels, inss) = (t + 1, dels + 1, 0);
            }
            EditKind::Insert => {
                (prev, inss, dels) = (op.state, inss + 1, 0);
            }
        }
        if dels > runs || inss > runs {
            return None;
        }
    }
    (t == cents.len() && prev.is_some()).then_some(total)
}

struct Search<'a> {
    fst: &'a ShrutiFst,
    cents: Vec<f64>,
    dirs: Vec<Direction>,
    best: f64,
}

impl Search<'_> {
    fn moves(&self, t: usize, prev: Option<ShrutiId>, dels: usize, inss: usize) -> Vec<(EditOp, f64)> {
        let raga = self.fst.raga();
        let runs = self.fst.params().max_gap_run;
        let len = self.cents.len();
        let dir = self.dirs[t.min(len - 1)];
        let mut out = Vec::new();
        if t < len {
            let o = self.cents[t];
            let near = raga.scale().nearest(o).unwrap().0;
            for &s in raga.active() {
                let op = if s == near { EditOp::matched(t, s) } else { EditOp::substitute(t, s) };
                if let Some(c) = self.fst.op_cost(&op, Some(o), prev, dir).unwrap() {
                    out.push((op, c));
                }
            }
            if dels < runs {
                let op = EditOp::delete(t);
                out.push((op, self.fst.op_cost(&op, Some(o), prev, dir).unwrap().unwrap()));
            }
        }
        if inss < runs {
            for &s in raga.active() {
                let op = EditOp::insert(s);
                if let Some(c) = self.fst.op_cost(&op, None, prev, dir).unwrap() {
                    out.push((op, c));
                }
            }
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }

    fn go(&mut self, t: usize, prev: Option<ShrutiId>, dels: usize, inss: usize, score: f64) {
        // every op scores <= 0, so a partial path at or below the incumbent cannot win
        if score <= self.best {
            return;
        }
        if t == self.cents.len() && prev.is_some() {
            self.best = score;
        }
        for (op, c) in self.moves(t, prev, dels, inss) {
            match op.kind {
                EditKind::Match | EditKind::Substitute => self.go(t + 1, op.state, 0, 0, score + c),
                EditKind::Delete => self.go(t + 1, prev, dels + 1, 0, score + c),
                EditKind::Insert => self.go(t, op.state, 0, inss + 1, score + c),
            }
        }
    }
}

/// Best op-path score over every legal edit sequence, or `None` if none exists.
pub fn brute_fst(fst: &ShrutiFst, seq: &PitchSequence) -> Option<f64> {
    let mut s = Search {
        fst,
        cents: seq.observed_cents().unwrap(),
        dirs: infer_direction(seq),
        best: f64::NEG_INFINITY,
    };
    s.go(0, None, 0, 0, 0.0);
    s.best.is_finite().then_some(s.best)
}

pub fn random_fst(rng: &mut ChaCha8Rng, raga: &RagaSpec) -> ShrutiFst {
    let weights = CostWeights::new(
        rng.random_range(0.05..1.0),
        rng.random_range(0.05..1.0),
        rng.random_range(0.05..1.0),
    )
    .unwrap();
    let params = FstParams {
        weights,
        edit_penalty: rng.random_range(0.5..2.0),
        // small gap penalties make INSERT and DELETE competitive
        gap_pitch_penalty: rng.random_range(0.0..3.0),
        max_gap_run: rng.random_range(0..=2),
    };
    ShrutiFst::new(raga, params).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-250)
}

/// One randomized instance checked against all three brute-force oracles.
/// Returns a description of the first disagreement.
pub fn check_instance(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let k = r.random_range(2..=8);
    let len = r.random_range(1..=6);
    let raga = random_raga(&mut r, k);
    let cents = random_cents(&mut r, &raga, len);
    let full = PitchSequence::from_cents(&cents).unwrap();
    let model = HmmModel::build(&raga, r.random_range(15.0..60.0)).unwrap();
    let ctx = format!("seed {seed} (k={k}, T={len})");

    let brute = brute_viterbi(&model, &full);
    match model.viterbi(&full) {
        Ok(v) => {
            if !close(v.log_likelihood, brute.best, 1e-9) {
                return Err(format!("{ctx}: viterbi {} vs brute {}", v.log_likelihood, brute.best));
            }
            let ranks: Vec<usize> = v.path.iter().map(|&s| raga.rank(s).unwrap()).collect();
            if !close(path_logprob(&model, &full, &ranks), brute.best, 1e-9) {
                return Err(format!("{ctx}: viterbi path does not attain its score"));
            }
            if brute.best - brute.runner_up > 1e-6 && ranks != brute.path {
                return Err(format!("{ctx}: viterbi path {ranks:?} vs brute {:?}", brute.path));
            }
        }
        Err(e) if brute.best.is_finite() => return Err(format!("{ctx}: viterbi failed: {e}")),
        Err(_) => {}
    }

    let gapped = with_gaps(&mut r, &cents, 0.3);
    let (ll, marg) = brute_marginals(&model, &gapped);
    match model.forward_backward(&gapped) {
        Ok(p) => {
            if !close(p.log_likelihood, ll, 1e-9) {
                return Err(format!("{ctx}: forward-backward loglik {} vs {ll}", p.log_likelihood));
            }
            for (t, (got, want)) in p.posteriors.iter().zip(&marg).enumerate() {
                for (i, (g, w)) in got.iter().zip(want).enumerate() {
                    if !close(*g, *w, 1e-9) {
                        return Err(format!("{ctx}: marginal ({t},{i}) {g} vs {w}"));
                    }
                }
            }
        }
        Err(e) if ll.is_finite() => return Err(format!("{ctx}: forward-backward failed: {e}")),
        Err(_) => {}
    }

    let fst = random_fst(&mut r, &raga);
    let best = brute_fst(&fst, &full);
    match (fst.correct(&full), best) {
        (Ok(c), Some(b)) => {
            if !close(c.score, b, 1e-9) {
                return Err(format!("{ctx}: fst {} vs exhaustive {b}", c.score));
            }
            match rescore_ops(&fst, &full, &c.ops) {
                Some(s) if close(s, c.score, 1e-9) => {}
                other => return Err(format!("{ctx}: fst ops rescore to {other:?}, reported {}", c.score)),
            }
        }
        (Err(_), None) => {}
        (got, want) => return Err(format!("{ctx}: fst {:?} vs exhaustive {want:?}", got.map(|c| c.score))),
    }
    Ok(())
}
