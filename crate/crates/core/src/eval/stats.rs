use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::datagen::{rng_from_seed, MissingPattern};
use crate::error::{Error, Result};
use crate::eval::bench::{EvalRecord, Model, Task};

/// z-value for a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std: f64,
    /// `1.96 * std / sqrt(n)`.
    pub ci95_halfwidth: f64,
}

/// Mean computed around the first value, so constant input returns it exactly.
pub fn mean(values: &[f64]) -> f64 {
    let pivot = values[0];
    pivot + values.iter().map(|v| v - pivot).sum::<f64>() / values.len() as f64
}

fn sample_var(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

pub fn summarize(values: &[f64]) -> Result<MetricSummary> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 values, got {n}")));
    }
    let std = sample_var(values).sqrt();
    Ok(MetricSummary { n, mean: mean(values), std, ci95_halfwidth: Z95 * std / (n as f64).sqrt() })
}

/// Standardized mean difference `(mean(a) - mean(b)) / pooled_sd`.
///
/// When both groups have zero spread the result is 0 for equal means and a signed
/// infinity otherwise.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData("cohen's d needs n >= 2 per group".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * sample_var(a) + (nb - 1.0) * sample_var(b)) / (na + nb - 2.0)).sqrt();
    Ok(ratio(mean(a) - mean(b), pooled))
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        num.signum() * f64::INFINITY
    }
}

/// One-way ANOVA F statistic across groups.
pub fn anova_f(groups: &[&[f64]]) -> Result<f64> {
    let k = groups.len();
    if k < 2 || groups.iter().any(|g| g.len() < 2) {
        return Err(Error::InsufficientData("anova needs >= 2 groups of n >= 2".into()));
    }
    let total_n: usize = groups.iter().map(|g| g.len()).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / total_n as f64;
    let ssb: f64 = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
    let ssw: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|v| (v - m).powi(2)).sum::<f64>()
        })
        .sum();
    let msb = ssb / (k - 1) as f64;
    let msw = ssw / (total_n - k) as f64;
    Ok(ratio(msb, msw).abs())
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_ci(values: &[f64], resamples: usize, level: f64, seed: u64) -> Result<(f64, f64)> {
    if values.len() < 2 || resamples == 0 {
        return Err(Error::InsufficientData("bootstrap needs n >= 2 and resamples > 0".into()));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidConfig(format!("confidence level {level} outside (0, 1)")));
    }
    let mut rng = rng_from_seed(seed);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let at = |q: f64| means[((q * resamples as f64).floor() as usize).min(resamples - 1)];
    Ok((at(tail), at(1.0 - tail)))
}

/// Per-model summaries for one metric set.
#[derive(Debug, Clone, Serialize)]
pub struct ModelStats {
    pub model: Model,
    pub failures: usize,
    pub accuracy: MetricSummary,
    pub pitch_error: MetricSummary,
    pub linear_pitch_error: MetricSummary,
    pub grammar_compliance: MetricSummary,
    pub pakad_recognition: MetricSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseEffect {
    pub a: Model,
    pub b: Model,
    /// Cohen's d on accuracy, positive when `a` is more accurate.
    pub d: f64,
}

/// All models evaluated under one (task, raga, rate, pattern) setting, pooled over
/// lengths and runs.
#[derive(Debug, Clone, Serialize)]
pub struct CellStats {
    pub task: Task,
    pub raga: String,
    pub rate: f64,
    pub pattern: Option<MissingPattern>,
    pub models: Vec<ModelStats>,
    pub effects: Vec<PairwiseEffect>,
    /// ANOVA F on accuracy across models, when at least two models have data.
    pub anova_f: Option<f64>,
}

impl CellStats {
    pub fn model(&self, m: Model) -> Option<&ModelStats> {
        self.models.iter().find(|s| s.model == m)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateStats {
    pub cells: Vec<CellStats>,
}

impl AggregateStats {
    pub fn cell(
        &self,
        task: Task,
        raga: &str,
        rate: f64,
        pattern: Option<MissingPattern>,
    ) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.task == task && c.raga == raga && c.rate == rate && c.pattern == pattern)
    }
}

type CellKey = (Task, String, u64, Option<MissingPattern>);

/// Group records into cells and summarize each model. Failed runs are counted but
/// excluded from the metric summaries.
pub fn aggregate_stats(records: &[EvalRecord]) -> Result<AggregateStats> {
    let mut order: Vec<CellKey> = Vec::new();
    let mut cells: BTreeMap<CellKey, BTreeMap<Model, Vec<&EvalRecord>>> = BTreeMap::new();
    for r in records {
        let key = (r.task, r.raga.clone(), r.rate.to_bits(), r.pattern);
        if !cells.contains_key(&key) {
            order.push(key.clone());
        }
        cells.entry(key).or_default().entry(r.model).or_default().push(r);
    }
    let mut out = Vec::with_capacity(order.len());
    for key in order {
        let by_model = &cells[&key];
        let mut models = Vec::new();
        let mut accs: Vec<(Model, Vec<f64>)> = Vec::new();
        for (&model, recs) in by_model {
            let ok: Vec<&EvalRecord> = recs.iter().copied().filter(|r| r.error.is_none()).collect();
            let col = |f: fn(&EvalRecord) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let acc = col(|r| r.shruti_accuracy);
            models.push(ModelStats {
                model,
                failures: recs.len() - ok.len(),
                accuracy: summarize(&acc)?,
                pitch_error: summarize(&col(|r| r.mean_pitch_error))?,
                linear_pitch_error: summarize(&col(|r| r.linear_pitch_error))?,
                grammar_compliance: summarize(&col(|r| r.grammar_compliance))?,
                pakad_recognition: summarize(&col(|r| r.pakad_recognition))?,
            });
            accs.push((model, acc));
        }
        let mut effects = Vec::new();
        for i in 0..accs.len() {
            for j in i + 1..accs.len() {
                effects.push(PairwiseEffect {
                    a: accs[i].0,
                    b: accs[j].0,
                    d: cohens_d(&accs[i].1, &accs[j].1)?,
                });
            }
        }
        let anova = if accs.len() >= 2 {
            let groups: Vec<&[f64]> = accs.iter().map(|(_, v)| v.as_slice()).collect();
            Some(anova_f(&groups)?)
        } else {
            None
        };
        let (task, raga, rate, pattern) = key;
        out.push(CellStats {
            task,
            raga,
            rate: f64::from_bits(rate),
            pattern,
            models,
            effects,
            anova_f: anova,
        });
    }
    Ok(AggregateStats { cells: out })
}
