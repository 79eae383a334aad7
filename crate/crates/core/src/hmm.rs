//! Grammar-constrained Shruti HMM.
//!
//! States are the raga's active Shrutis. Emissions are Gaussian in circular cent
//! distance; transitions come from normalized grammar weights, with separate
//! matrices for ascending and descending moves. Viterbi and forward-backward both
//! run in log space.

use crate::error::{Error, Result};
use crate::raga::{Direction, RagaSpec};
use crate::scale::{circular_distance, ShrutiId};
use crate::sequence::{Observation, PitchSequence};

/// Emission standard deviation in cents.
pub const DEFAULT_SIGMA: f64 = 25.0;

#[derive(Debug, Clone)]
pub struct HmmModel {
    raga: RagaSpec,
    mu: Vec<f64>,
    sigma: f64,
    a_up: Vec<Vec<f64>>,
    a_down: Vec<Vec<f64>>,
    log_a_up: Vec<Vec<f64>>,
    log_a_down: Vec<Vec<f64>>,
    pi: Vec<f64>,
}

fn ln(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

impl HmmModel {
    /// Build the model for `raga` with emission std-dev `sigma` (cents).
    pub fn build(raga: &RagaSpec, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidInput(format!("sigma must be > 0, got {sigma}")));
        }
        let n = raga.num_active();
        let a_up = raga.normalized_transitions(Direction::Ascending);
        let a_down = raga.normalized_transitions(Direction::Descending);
        let log = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            m.iter().map(|r| r.iter().map(|&p| ln(p)).collect()).collect()
        };
        Ok(HmmModel {
            mu: raga.active().iter().map(|&s| raga.cents_of(s)).collect(),
            sigma,
            log_a_up: log(&a_up),
            log_a_down: log(&a_down),
            a_up,
            a_down,
            pi: vec![1.0 / n as f64; n],
            raga: raga.clone(),
        })
    }

    pub fn raga(&self) -> &RagaSpec {
        &self.raga
    }

    pub fn num_states(&self) -> usize {
        self.mu.len()
    }

    pub fn states(&self) -> &[ShrutiId] {
        self.raga.active()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Row-stochastic transition matrix for one direction, indexed by state rank.
    pub fn transitions(&self, dir: Direction) -> &[Vec<f64>] {
        match dir {
            Direction::Ascending => &self.a_up,
            Direction::Descending => &self.a_down,
        }
    }

    pub fn log_transitions(&self, dir: Direction) -> &[Vec<f64>] {
        match dir {
            Direction::Ascending => &self.log_a_up,
            Direction::Descending => &self.log_a_down,
        }
    }

    /// Normalized transition probability between two Shrutis (0 for inactive ones).
    pub fn transition_prob(&self, from: ShrutiId, to: ShrutiId, dir: Direction) -> f64 {
        match (self.raga.rank(from), self.raga.rank(to)) {
            (Some(i), Some(j)) => self.transitions(dir)[i][j],
            _ => 0.0,
        }
    }

    /// Gaussian log density of `obs` given the state at rank `state`.
    #[inline]
    pub fn emission_logprob_rank(&self, obs: f64, state: usize) -> f64 {
        let d = circular_distance(obs, self.mu[state]);
        let var = self.sigma * self.sigma;
        -0.5 * (2.0 * std::f64::consts::PI * var).ln() - d * d / (2.0 * var)
    }

    /// Gaussian log density of `obs` given Shruti `state`.
    pub fn emission_logprob(&self, obs: f64, state: ShrutiId) -> Result<f64> {
        if !obs.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite observation {obs}")));
        }
        let r = self
            .raga
            .rank(state)
            .ok_or_else(|| Error::InvalidState(state.index(), self.raga.name().to_string()))?;
        Ok(self.emission_logprob_rank(obs, r))
    }

    fn log_emissions(&self, obs: Observation) -> Vec<f64> {
        match obs {
            Observation::Cents(c) => {
                (0..self.num_states()).map(|j| self.emission_logprob_rank(c, j)).collect()
            }
            Observation::Missing => vec![0.0; self.num_states()],
        }
    }

    /// Most probable state path for a fully observed sequence.
    pub fn viterbi(&self, seq: &PitchSequence) -> Result<ViterbiPath> {
        if seq.has_missing() {
            return Err(Error::InvalidTask("sequence has MISSING observations; use completion".into()));
        }
        let n = self.num_states();
        let dirs = infer_direction(seq);
        let mut delta: Vec<f64> =
            self.log_emissions(seq.get(0)).iter().zip(&self.pi).map(|(e, p)| e + p.ln()).collect();
        let mut back: Vec<Vec<usize>> = Vec::with_capacity(seq.len().saturating_sub(1));
        let mut next = vec![0.0; n];
        for (t, &dir) in dirs.iter().enumerate().skip(1) {
            let log_a = self.log_transitions(dir);
            let emit = self.log_emissions(seq.get(t));
            let mut bp = vec![0usize; n];
            for j in 0..n {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for (i, d) in delta.iter().enumerate() {
                    let v = d + log_a[i][j];
                    if v > best {
                        best = v;
                        arg = i;
                    }
                }
                next[j] = best + emit[j];
                bp[j] = arg;
            }
            std::mem::swap(&mut delta, &mut next);
            back.push(bp);
        }
        let (mut state, mut log_likelihood) = (0usize, f64::NEG_INFINITY);
        for (j, &d) in delta.iter().enumerate() {
            if d > log_likelihood {
                log_likelihood = d;
                state = j;
            }
        }
        if !log_likelihood.is_finite() {
            return Err(Error::InvalidInput("no state path has positive probability".into()));
        }
        let mut ranks = vec![state; seq.len()];
        for t in (1..seq.len()).rev() {
            state = back[t - 1][state];
            ranks[t - 1] = state;
        }
        let states = self.states();
        Ok(ViterbiPath { path: ranks.iter().map(|&r| states[r]).collect(), log_likelihood })
    }

    /// Log-space forward-backward. Missing positions use a unit emission for every state.
    pub fn forward_backward(&self, seq: &PitchSequence) -> Result<Posterior> {
        if seq.all_missing() {
            return Err(Error::InvalidInput(
                "every observation is MISSING; nothing to anchor completion".into(),
            ));
        }
        let n = self.num_states();
        let len = seq.len();
        let dirs = infer_direction(seq);
        let emit: Vec<Vec<f64>> = (0..len).map(|t| self.log_emissions(seq.get(t))).collect();

        let mut alpha = vec![vec![f64::NEG_INFINITY; n]; len];
        for j in 0..n {
            alpha[0][j] = self.pi[j].ln() + emit[0][j];
        }
        let mut terms = vec![0.0; n];
        for t in 1..len {
            let log_a = self.log_transitions(dirs[t]);
            for j in 0..n {
                for i in 0..n {
                    terms[i] = alpha[t - 1][i] + log_a[i][j];
                }
                alpha[t][j] = log_sum_exp(&terms) + emit[t][j];
            }
        }

        let mut beta = vec![vec![0.0; n]; len];
        for t in (0..len - 1).rev() {
            let log_a = self.log_transitions(dirs[t + 1]);
            for i in 0..n {
                for j in 0..n {
                    terms[j] = log_a[i][j] + emit[t + 1][j] + beta[t + 1][j];
                }
                beta[t][i] = log_sum_exp(&terms);
            }
        }

        let log_likelihood = log_sum_exp(&alpha[len - 1]);
        if !log_likelihood.is_finite() {
            return Err(Error::InvalidInput(
                "observations are inconsistent with the grammar (zero probability)".into(),
            ));
        }
        let states = self.states();
        let mut posteriors = Vec::with_capacity(len);
        let mut path = Vec::with_capacity(len);
        for t in 0..len {
            let joint: Vec<f64> = (0..n).map(|i| alpha[t][i] + beta[t][i]).collect();
            let z = log_sum_exp(&joint);
            let g: Vec<f64> = joint.iter().map(|x| (x - z).exp()).collect();
            let mut best = 0;
            for (i, &p) in g.iter().enumerate() {
                if p > g[best] {
                    best = i;
                }
            }
            path.push(states[best]);
            posteriors.push(g);
        }
        Ok(Posterior { path, posteriors, log_likelihood })
    }
}

/// `ln(sum(exp(x)))` without overflow; empty or all `-inf` input gives `-inf`.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiPath {
    pub path: Vec<ShrutiId>,
    /// Joint log probability of the path and the observations.
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    /// Argmax-posterior state at each position.
    pub path: Vec<ShrutiId>,
    /// Per-position posterior over states, ordered like [`HmmModel::states`].
    pub posteriors: Vec<Vec<f64>>,
    /// Log probability of the observed values.
    pub log_likelihood: f64,
}

/// Melodic direction at each position from the pitch gradient.
///
/// Position 0 is ascending. A position is ascending iff its pitch is at least the
/// most recent observed pitch before it; missing positions repeat the previous
/// direction.
pub fn infer_direction(seq: &PitchSequence) -> Vec<Direction> {
    let mut out = Vec::with_capacity(seq.len());
    let mut last: Option<f64> = None;
    let mut dir = Direction::Ascending;
    for obs in seq.items() {
        if let Observation::Cents(c) = *obs {
            if let Some(prev) = last {
                dir = Direction::of_move(prev, c);
            }
            last = Some(c);
        }
        out.push(dir);
    }
    out
}

/// Build a model. See [`HmmModel::build`].
pub fn build_model(raga: &RagaSpec, sigma: f64) -> Result<HmmModel> {
    HmmModel::build(raga, sigma)
}

/// Viterbi decoding for the correction task.
pub fn viterbi_correct(model: &HmmModel, seq: &PitchSequence) -> Result<ViterbiPath> {
    model.viterbi(seq)
}

/// Forward-backward decoding for the completion task.
pub fn forward_backward_complete(model: &HmmModel, seq: &PitchSequence) -> Result<Posterior> {
    model.forward_backward(seq)
}
