//! Benchmark grid: datagen, decode, score, aggregate.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{
    apply_missing, corrupt, derive_seed, generate_sequence, CorruptionConfig, MissingConfig, MissingPattern,
    Substitution,
};
use crate::error::{Error, Result};
use crate::eval::baselines::{nearest_cent_baseline, random_baseline};
use crate::eval::metrics::{avg_linear_pitch_error, avg_pitch_error, select, shruti_accuracy};
use crate::eval::stats::{aggregate_stats, AggregateStats};
use crate::fst::{CompletionParams, CostWeights, FstParams, ShrutiFst};
use crate::hmm::{HmmModel, DEFAULT_SIGMA};
use crate::raga::{builtin, grammar_compliance, pakad_recognition, RagaSpec};
use crate::scale::ShrutiId;
use crate::sequence::PitchSequence;

pub const BENCH_SCHEMA_VERSION: u32 = 1;

const PRESETS: &[(&str, &str)] = &[
    ("table1", include_str!("../../data/presets/table1.toml")),
    ("table2", include_str!("../../data/presets/table2.toml")),
    ("robustness", include_str!("../../data/presets/robustness.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Fst,
    #[serde(rename = "nearest")]
    NearestCent,
    Hmm,
    Random,
}

impl Model {
    pub fn label(self) -> &'static str {
        match self {
            Model::Fst => "FST",
            Model::NearestCent => "NearestCent",
            Model::Hmm => "HMM",
            Model::Random => "Random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Correction,
    Completion,
}

/// How correction inputs are corrupted; the rate comes from the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptionModel {
    #[serde(default)]
    pub noise_cents: f64,
    #[serde(default = "full_scale")]
    pub substitution: Substitution,
}

impl CorruptionModel {
    /// Concrete corruption settings for one grid rate and seed.
    pub fn to_config(&self, rate: f64, seed: u64) -> CorruptionConfig {
        CorruptionConfig {
            substitution_rate: rate,
            noise_cents: self.noise_cents,
            seed,
            substitution: self.substitution,
        }
    }
}

fn full_scale() -> Substitution {
    Substitution::FullScale
}

impl Default for CorruptionModel {
    fn default() -> Self {
        CorruptionModel { noise_cents: 0.0, substitution: Substitution::FullScale }
    }
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

/// A benchmark grid: models x ragas x rates x (patterns) x lengths x runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub schema_version: u32,
    pub name: String,
    pub task: Task,
    pub models: Vec<Model>,
    pub ragas: Vec<String>,
    /// Substitution rate for correction, missing rate for completion.
    pub rates: Vec<f64>,
    pub lengths: Vec<usize>,
    pub runs_per_length: usize,
    pub seed: u64,
    #[serde(default)]
    pub patterns: Vec<MissingPattern>,
    #[serde(default)]
    pub corruption: CorruptionModel,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub weights: CostWeights,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.schema_version != BENCH_SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.models.is_empty() || self.ragas.is_empty() || self.rates.is_empty() || self.lengths.is_empty()
        {
            return bad("empty benchmark grid".into());
        }
        if self.runs_per_length * self.lengths.len() < 2 {
            return bad("each cell needs at least two runs".into());
        }
        if let Some(l) = self.lengths.iter().find(|&&l| l < 2) {
            return bad(format!("sequence length {l} is below 2"));
        }
        for name in &self.ragas {
            builtin(name)?;
        }
        CostWeights::new(self.weights.lambda_pitch, self.weights.lambda_grammar, self.weights.lambda_edit)?;
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("sigma {} must be > 0", self.sigma));
        }
        match self.task {
            Task::Correction => {
                if !self.patterns.is_empty() {
                    return bad("missing patterns only apply to completion".into());
                }
                for &rate in &self.rates {
                    self.corruption.to_config(rate, 0).validate()?;
                }
            }
            Task::Completion => {
                if self.patterns.is_empty() {
                    return bad("completion grid needs at least one missing pattern".into());
                }
                if let Some(m) = self.models.iter().find(|m| !matches!(m, Model::Fst | Model::Hmm)) {
                    return bad(format!("model {} cannot complete sequences", m.label()));
                }
                if let Some(r) = self.rates.iter().find(|r| !(0.0..1.0).contains(*r)) {
                    return bad(format!("missing rate {r} outside [0, 1)"));
                }
            }
        }
        Ok(())
    }
}

pub fn load_bench_config(source: &str) -> Result<BenchConfig> {
    let cfg: BenchConfig = toml::from_str(source).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn builtin_preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn builtin_preset(name: &str) -> Result<BenchConfig> {
    let src = PRESETS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown preset `{name}`")))?;
    load_bench_config(src)
}

/// One model's result on one generated sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub model: Model,
    pub raga: String,
    pub task: Task,
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<MissingPattern>,
    pub length: usize,
    pub run: usize,
    pub seed: u64,
    pub shruti_accuracy: f64,
    pub mean_pitch_error: f64,
    pub linear_pitch_error: f64,
    pub grammar_compliance: f64,
    pub pakad_recognition: f64,
    /// Decode time only. Kept out of the record file so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub config: BenchConfig,
    pub records: Vec<EvalRecord>,
    pub stats: AggregateStats,
}

struct Engines {
    raga: RagaSpec,
    hmm: HmmModel,
    fst: ShrutiFst,
    completion: CompletionParams,
}

struct Job {
    raga: usize,
    rate: usize,
    pattern: Option<usize>,
    length: usize,
    run: usize,
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchOutput> {
    cfg.validate()?;
    let engines: Vec<Engines> = cfg
        .ragas
        .iter()
        .map(|name| {
            let raga = builtin(name)?;
            Ok(Engines {
                hmm: HmmModel::build(&raga, cfg.sigma)?,
                fst: ShrutiFst::new(&raga, FstParams { weights: cfg.weights, ..FstParams::default() })?,
                completion: CompletionParams::default(),
                raga,
            })
        })
        .collect::<Result<_>>()?;

    let patterns: Vec<Option<usize>> = match cfg.task {
        Task::Correction => vec![None],
        Task::Completion => (0..cfg.patterns.len()).map(Some).collect(),
    };
    let mut jobs = Vec::new();
    for raga in 0..cfg.ragas.len() {
        for rate in 0..cfg.rates.len() {
            for &pattern in &patterns {
                for &length in &cfg.lengths {
                    for run in 0..cfg.runs_per_length {
                        jobs.push(Job { raga, rate, pattern, length, run });
                    }
                }
            }
        }
    }
    let records: Vec<EvalRecord> = jobs
        .par_iter()
        .map(|job| run_job(cfg, &engines[job.raga], job))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let stats = aggregate_stats(&records)?;
    Ok(BenchOutput { config: cfg.clone(), records, stats })
}

fn run_job(cfg: &BenchConfig, eng: &Engines, job: &Job) -> Result<Vec<EvalRecord>> {
    let seed = derive_seed(
        cfg.seed,
        &[
            job.raga as u64,
            job.rate as u64,
            job.pattern.map_or(0, |p| p as u64 + 1),
            job.length as u64,
            job.run as u64,
        ],
    );
    let rate = cfg.rates[job.rate];
    let pattern = job.pattern.map(|p| cfg.patterns[p]);
    let truth = generate_sequence(&eng.raga, job.length, derive_seed(seed, &[0]))?;
    let scale = eng.raga.scale();
    let input = match cfg.task {
        Task::Correction => corrupt(&truth, scale, &cfg.corruption.to_config(rate, derive_seed(seed, &[1])))?,
        Task::Completion => apply_missing(
            &truth,
            scale,
            &MissingConfig {
                missing_rate: rate,
                pattern: pattern.expect("completion job has a pattern"),
                seed: derive_seed(seed, &[1]),
            },
        )?,
    };
    let mut out = Vec::with_capacity(cfg.models.len());
    for &model in &cfg.models {
        let start = Instant::now();
        let decoded = decode(cfg.task, model, eng, &input, derive_seed(seed, &[2]));
        let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        let mut rec = EvalRecord {
            model,
            raga: eng.raga.name().to_string(),
            task: cfg.task,
            rate,
            pattern,
            length: job.length,
            run: job.run,
            seed,
            shruti_accuracy: 0.0,
            mean_pitch_error: 0.0,
            linear_pitch_error: 0.0,
            grammar_compliance: 0.0,
            pakad_recognition: 0.0,
            wall_time_ms,
            error: None,
        };
        match decoded.and_then(|d| score(cfg.task, eng, &input, &truth, &d)) {
            Ok(m) => {
                rec.shruti_accuracy = m[0];
                rec.mean_pitch_error = m[1];
                rec.linear_pitch_error = m[2];
                rec.grammar_compliance = m[3];
                rec.pakad_recognition = m[4];
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        out.push(rec);
    }
    Ok(out)
}

/// Decoder output: the emitted sequence plus one label per input position.
struct Decoded {
    emitted: Vec<ShrutiId>,
    aligned: Vec<ShrutiId>,
}

fn decode(task: Task, model: Model, eng: &Engines, input: &PitchSequence, seed: u64) -> Result<Decoded> {
    let same = |v: Vec<ShrutiId>| Decoded { emitted: v.clone(), aligned: v };
    match (task, model) {
        (Task::Correction, Model::Fst) => {
            let c = eng.fst.correct(input)?;
            Ok(Decoded { emitted: c.output, aligned: c.aligned })
        }
        (Task::Correction, Model::Hmm) => Ok(same(eng.hmm.viterbi(input)?.path)),
        (Task::Correction, Model::NearestCent) => Ok(same(nearest_cent_baseline(input, eng.raga.scale())?)),
        (Task::Correction, Model::Random) => Ok(same(random_baseline(input, &eng.raga, seed))),
        (Task::Completion, Model::Fst) => Ok(same(eng.fst.complete(input, &eng.completion)?)),
        (Task::Completion, Model::Hmm) => Ok(same(eng.hmm.forward_backward(input)?.path)),
        (Task::Completion, m) => Err(Error::InvalidTask(format!("{} cannot complete sequences", m.label()))),
    }
}

fn score(
    task: Task,
    eng: &Engines,
    input: &PitchSequence,
    truth: &[ShrutiId],
    d: &Decoded,
) -> Result<[f64; 5]> {
    let scale = eng.raga.scale();
    let (pred, gold) = match task {
        Task::Correction => (d.aligned.clone(), truth.to_vec()),
        Task::Completion => {
            let gaps = input.missing_positions();
            if gaps.is_empty() {
                return Err(Error::InsufficientData("no MISSING positions to score".into()));
            }
            select(&d.aligned, truth, &gaps)?
        }
    };
    Ok([
        shruti_accuracy(&pred, &gold)?,
        avg_pitch_error(&pred, &gold, scale)?,
        avg_linear_pitch_error(&pred, &gold, scale)?,
        grammar_compliance(&d.emitted, &eng.raga),
        pakad_recognition(&d.emitted, &eng.raga),
    ])
}

/// Records as one JSON object per line.
pub fn records_jsonl(records: &[EvalRecord]) -> Result<String> {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?);
        s.push('\n');
    }
    Ok(s)
}

/// Human-readable summary: one row per model per cell, then effect sizes.
pub fn summary_table(stats: &AggregateStats) -> String {
    let mut s = String::new();
    for cell in &stats.cells {
        let pattern = cell.pattern.map_or(String::new(), |p| format!(", pattern {}", p.as_str()));
        let _ = writeln!(s, "## {:?} | {} | rate {}{}\n", cell.task, cell.raga, cell.rate, pattern);
        let _ = writeln!(
            s,
            "| Model | n | Shruti Acc. (%) | Mean Error (cents) | Linear Error (cents) | Compliance | Pakad | Failures |"
        );
        let _ = writeln!(s, "|---|---|---|---|---|---|---|---|");
        for m in &cell.models {
            let _ = writeln!(
                s,
                "| {} | {} | {:.1} ± {:.1} | {:.1} ± {:.1} | {:.1} | {:.3} | {:.3} | {} |",
                m.model.label(),
                m.accuracy.n,
                m.accuracy.mean * 100.0,
                m.accuracy.ci95_halfwidth * 100.0,
                m.pitch_error.mean,
                m.pitch_error.ci95_halfwidth,
                m.linear_pitch_error.mean,
                m.grammar_compliance.mean,
                m.pakad_recognition.mean,
                m.failures,
            );
        }
        if let Some(f) = cell.anova_f {
            let _ = writeln!(s, "\nANOVA F (accuracy): {f:.2}");
        }
        for e in &cell.effects {
            let _ = writeln!(s, "Cohen's d {} vs {}: {:.2}", e.a.label(), e.b.label(), e.d);
        }
        s.push('\n');
    }
    s
}

/// `(rate, accuracy)` series per raga, pattern, and model.
pub fn robustness_csv(stats: &AggregateStats) -> String {
    let mut s = String::from("task,raga,pattern,rate,model,n,accuracy_mean,accuracy_ci95,pitch_error_mean\n");
    for cell in &stats.cells {
        for m in &cell.models {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:.6},{:.6},{:.4}",
                match cell.task {
                    Task::Correction => "correction",
                    Task::Completion => "completion",
                },
                cell.raga,
                cell.pattern.map_or("", |p| p.as_str()),
                cell.rate,
                m.model.label(),
                m.accuracy.n,
                m.accuracy.mean,
                m.accuracy.ci95_halfwidth,
                m.pitch_error.mean,
            );
        }
    }
    s
}

pub fn timings_csv(records: &[EvalRecord]) -> String {
    let mut s = String::from("model,raga,rate,length,run,wall_time_ms\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:.4}",
            r.model.label(),
            r.raga,
            r.rate,
            r.length,
            r.run,
            r.wall_time_ms
        );
    }
    s
}

/// Write `records.jsonl`, `summary.md`, `robustness.csv`, and `timings.csv`.
pub fn write_outputs(dir: &Path, out: &BenchOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("records.jsonl"), records_jsonl(&out.records)?)?;
    fs::write(dir.join("summary.md"), summary_table(&out.stats))?;
    fs::write(dir.join("robustness.csv"), robustness_csv(&out.stats))?;
    fs::write(dir.join("timings.csv"), timings_csv(&out.records))?;
    Ok(())
}
