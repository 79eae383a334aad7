//! `shruti`: correct, complete, generate, synthesize and benchmark 22-Shruti pitch sequences.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 task precondition
//! violated (for example MISSING values handed to a correction engine).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use shruti_core::datagen::{
    apply_missing, corrupt, derive_seed, generate_sequence, CorruptionConfig, MissingConfig, MissingPattern,
    Substitution,
};
use shruti_core::eval::bench::{summary_table, write_outputs};
use shruti_core::eval::metrics::select;
use shruti_core::eval::{
    avg_pitch_error, builtin_preset, builtin_preset_names, load_bench_config, nearest_cent_baseline,
    random_baseline, run_benchmark, shruti_accuracy,
};
use shruti_core::hmm::DEFAULT_SIGMA;
use shruti_core::raga::{
    builtin, builtin_names, builtin_source, grammar_compliance, load_raga, pakad_recognition,
};
use shruti_core::seqfile::SequenceFile;
use shruti_core::wav::{write_wav, WavParams};
use shruti_core::{
    CompletionParams, CostWeights, FstParams, HmmModel, Observation, PitchSequence, RagaSpec, ShrutiFst,
    ShrutiId,
};

const DEFAULT_TONIC_HZ: f64 = 261.63;
const MAX_RATE: f64 = 0.5;

#[derive(Parser)]
#[command(
    name = "shruti",
    version,
    about = "Grammar-aware correction and completion of 22-Shruti pitch sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correct a fully observed sequence.
    Correct(CorrectArgs),
    /// Fill MISSING positions in a sequence.
    Complete(CompleteArgs),
    /// Write a seeded synthetic dataset with a manifest.
    Generate(GenerateArgs),
    /// Render a sequence file as a stereo 16-bit WAV.
    Synth(SynthArgs),
    /// Run a benchmark grid from a config file or a shipped preset.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Raga name (built-in) or path to a raga TOML file; defaults to the input header.
    #[arg(long)]
    raga: Option<String>,
    /// Override the tonic from the input header.
    #[arg(long)]
    tonic_hz: Option<f64>,
    #[arg(long, default_value_t = 0.6)]
    lambda_pitch: f64,
    #[arg(long, default_value_t = 0.3)]
    lambda_grammar: f64,
    #[arg(long, default_value_t = 0.1)]
    lambda_edit: f64,
    /// HMM emission standard deviation in cents.
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    /// Seed for the random engine.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ground-truth sequence file; adds metrics to the report.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CorrectEngine {
    Fst,
    Hmm,
    Nearest,
    Random,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CompleteEngine {
    Fst,
    Hmm,
}

#[derive(Args)]
struct CorrectArgs {
    input: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "fst")]
    engine: CorrectEngine,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct CompleteArgs {
    input: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "hmm")]
    engine: CompleteEngine,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value = "yaman")]
    raga: String,
    /// Sequence lengths; `count` sequences are written for each.
    #[arg(long, value_delimiter = ',', default_values_t = [50])]
    length: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TONIC_HZ)]
    tonic_hz: f64,
    /// Fraction of notes replaced by a wrong pitch.
    #[arg(long, default_value_t = 0.4, conflicts_with = "missing_rate")]
    corruption_rate: f64,
    /// Uniform jitter in cents added to every note of a corrupted sequence.
    #[arg(long, default_value_t = 8.0)]
    noise_cents: f64,
    /// Share of substitutions drawn from the whole 22-Shruti table; the rest are detuned.
    #[arg(long, default_value_t = 0.26)]
    full_scale_fraction: f64,
    /// Largest detuning of a substituted note, in cents.
    #[arg(long, default_value_t = 15.0)]
    detune_cents: f64,
    /// Write a completion dataset with this fraction of MISSING positions instead.
    #[arg(long)]
    missing_rate: Option<f64>,
    #[arg(long, default_value = "random")]
    pattern: MissingPattern,
    /// Allow rates above 0.5.
    #[arg(long)]
    force: bool,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    input: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    tonic_hz: Option<f64>,
    /// Concatenate raw sine blocks without the 5 ms fades.
    #[arg(long)]
    no_fade: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Config file, or the name of a shipped preset (table1, table2, robustness).
    config: String,
    #[arg(short, long)]
    out: PathBuf,
    /// Override runs per (raga, rate, length) cell.
    #[arg(long)]
    runs_per_length: Option<usize>,
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn usage(err: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, err: err.into() }
    }

    fn precondition(msg: impl Into<String>) -> Self {
        Failure { code: 3, err: anyhow!(msg.into()) }
    }
}

impl From<shruti_core::Error> for Failure {
    fn from(e: shruti_core::Error) -> Self {
        use shruti_core::Error::*;
        let code = match e {
            InvalidTask(_) | InsufficientData(_) => 3,
            _ => 2,
        };
        Failure { code, err: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure { code: 2, err }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Correct(a) => cmd_correct(a),
        Command::Complete(a) => cmd_complete(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn resolve_raga(name: &str) -> Result<RagaSpec, Failure> {
    if builtin_source(name).is_some() {
        return Ok(builtin(name)?);
    }
    let path = Path::new(name);
    if path.is_file() {
        let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(load_raga(&src)?);
    }
    let known: Vec<&str> = builtin_names().collect();
    Err(Failure::usage(anyhow!("unknown raga `{name}` (built-in: {})", known.join(", "))))
}

/// Input file, its tonic-relative sequence, and the raga to decode under.
struct Loaded {
    seq: PitchSequence,
    raga: RagaSpec,
    tonic_hz: f64,
}

fn load_input(path: &Path, model: &ModelArgs) -> Result<Loaded, Failure> {
    let mut file = SequenceFile::read(path)?;
    if let Some(t) = model.tonic_hz {
        file.tonic_hz = t;
    }
    let seq = file.to_sequence()?;
    let name =
        model.raga.clone().or_else(|| file.raga.clone()).ok_or_else(|| {
            Failure::usage(anyhow!("no raga given: pass --raga or set `raga` in the header"))
        })?;
    let raga = resolve_raga(&name)?;
    let tonic_hz = file.tonic_hz;
    Ok(Loaded { seq, raga, tonic_hz })
}

fn weights(model: &ModelArgs) -> Result<CostWeights, Failure> {
    Ok(CostWeights::new(model.lambda_pitch, model.lambda_grammar, model.lambda_edit)?)
}

fn write_result(out: &Path, loaded: &Loaded, ids: &[ShrutiId]) -> Result<(), Failure> {
    let obs = ids.iter().map(|&s| Observation::Cents(loaded.raga.cents_of(s))).collect();
    let file = SequenceFile::new(loaded.tonic_hz, Some(loaded.raga.name().to_string()), obs)?;
    ensure_parent(out)?;
    file.write(out)?;
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn write_report(out: &Path, report: &serde_json::Value) -> Result<PathBuf, Failure> {
    let mut name = out.as_os_str().to_owned();
    name.push(".report.json");
    let path = PathBuf::from(name);
    let text = serde_json::to_string_pretty(report).context("serializing report")?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Ground-truth Shrutis: nearest table entry of each truth value.
fn load_truth(path: &Path, loaded: &Loaded) -> Result<Vec<ShrutiId>, Failure> {
    let seq = SequenceFile::read(path)?.to_sequence()?;
    if seq.len() != loaded.seq.len() {
        return Err(Failure::usage(anyhow!(
            "truth has {} values, input has {}",
            seq.len(),
            loaded.seq.len()
        )));
    }
    if seq.has_missing() {
        return Err(Failure::usage(anyhow!("truth file must not contain MISSING")));
    }
    Ok(nearest_cent_baseline(&seq, loaded.raga.scale())?)
}

fn metrics(pred: &[ShrutiId], truth: &[ShrutiId], raga: &RagaSpec) -> Result<serde_json::Value, Failure> {
    Ok(json!({
        "shruti_accuracy": shruti_accuracy(pred, truth)?,
        "mean_pitch_error": avg_pitch_error(pred, truth, raga.scale())?,
        "grammar_compliance": grammar_compliance(pred, raga),
        "pakad_recognition": pakad_recognition(pred, raga),
    }))
}

fn ids_json(ids: &[ShrutiId]) -> Vec<usize> {
    ids.iter().map(|s| s.index()).collect()
}

fn cmd_correct(a: CorrectArgs) -> Outcome {
    let loaded = load_input(&a.input, &a.model)?;
    if loaded.seq.has_missing() {
        return Err(Failure::precondition(format!(
            "{} has MISSING values at {:?}; use complete",
            a.input.display(),
            loaded.seq.missing_positions()
        )));
    }
    let raga = &loaded.raga;
    let mut report = json!({
        "command": "correct",
        "engine": a.engine,
        "raga": raga.name(),
        "input": a.input,
        "length": loaded.seq.len(),
    });
    let ids = match a.engine {
        CorrectEngine::Fst => {
            let params = FstParams { weights: weights(&a.model)?, ..FstParams::default() };
            let c = ShrutiFst::new(raga, params)?.correct(&loaded.seq)?;
            report["score"] = json!(c.score);
            report["emitted"] = json!(ids_json(&c.output));
            report["ops"] = serde_json::to_value(&c.ops).context("serializing ops")?;
            c.aligned
        }
        CorrectEngine::Hmm => {
            let v = HmmModel::build(raga, a.model.sigma)?.viterbi(&loaded.seq)?;
            report["log_likelihood"] = json!(v.log_likelihood);
            v.path
        }
        CorrectEngine::Nearest => nearest_cent_baseline(&loaded.seq, raga.scale())?,
        CorrectEngine::Random => random_baseline(&loaded.seq, raga, a.model.seed),
    };
    report["path"] = json!(ids_json(&ids));
    if let Some(t) = &a.model.truth {
        let truth = load_truth(t, &loaded)?;
        report["metrics"] = metrics(&ids, &truth, raga)?;
    }
    write_result(&a.out, &loaded, &ids)?;
    write_report(&a.out, &report)?;
    Ok(())
}

fn cmd_complete(a: CompleteArgs) -> Outcome {
    let loaded = load_input(&a.input, &a.model)?;
    if loaded.seq.all_missing() {
        return Err(Failure::precondition(format!(
            "{} is entirely MISSING; nothing to anchor completion",
            a.input.display()
        )));
    }
    let gaps = loaded.seq.missing_positions();
    if gaps.is_empty() {
        eprintln!("warning: {} has no MISSING values; output is its quantization", a.input.display());
    }
    let raga = &loaded.raga;
    let mut report = json!({
        "command": "complete",
        "engine": a.engine,
        "raga": raga.name(),
        "input": a.input,
        "length": loaded.seq.len(),
        "missing_positions": gaps,
    });
    let ids = match a.engine {
        CompleteEngine::Fst => {
            let params = FstParams { weights: weights(&a.model)?, ..FstParams::default() };
            ShrutiFst::new(raga, params)?.complete(&loaded.seq, &CompletionParams::default())?
        }
        CompleteEngine::Hmm => {
            let model = HmmModel::build(raga, a.model.sigma)?;
            let p = model.forward_backward(&loaded.seq)?;
            report["log_likelihood"] = json!(p.log_likelihood);
            report["states"] = json!(ids_json(model.states()));
            report["posteriors"] = json!(p.posteriors);
            p.path
        }
    };
    report["path"] = json!(ids_json(&ids));
    if let Some(t) = &a.model.truth {
        let truth = load_truth(t, &loaded)?;
        let mut m = metrics(&ids, &truth, raga)?;
        if !gaps.is_empty() {
            let (p, t) = select(&ids, &truth, &gaps)?;
            m["gap_accuracy"] = json!(shruti_accuracy(&p, &t)?);
            m["gap_pitch_error"] = json!(avg_pitch_error(&p, &t, raga.scale())?);
        }
        report["metrics"] = m;
    }
    write_result(&a.out, &loaded, &ids)?;
    write_report(&a.out, &report)?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest {
    schema_version: u32,
    raga: String,
    tonic_hz: f64,
    seed: u64,
    count: usize,
    lengths: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    corruption: Option<CorruptionManifest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    missing: Option<MissingManifest>,
    sequences: Vec<ManifestEntry>,
}

#[derive(Serialize)]
struct CorruptionManifest {
    substitution_rate: f64,
    noise_cents: f64,
    substitution: Substitution,
}

#[derive(Serialize)]
struct MissingManifest {
    missing_rate: f64,
    pattern: MissingPattern,
}

#[derive(Serialize)]
struct ManifestEntry {
    input: String,
    truth: String,
    length: usize,
    seed: u64,
}

fn check_rate(name: &str, rate: f64, force: bool) -> Result<(), Failure> {
    let max = if force { 1.0 } else { MAX_RATE };
    if !(0.0..=max).contains(&rate) {
        let hint = if force { "" } else { " (pass --force to go above 0.5)" };
        return Err(Failure::usage(anyhow!("{name} {rate} outside [0, {max}]{hint}")));
    }
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Outcome {
    let raga = resolve_raga(&a.raga)?;
    if a.count == 0 || a.length.is_empty() {
        return Err(Failure::usage(anyhow!("nothing to generate: count and lengths must be non-empty")));
    }
    if !(a.tonic_hz.is_finite() && a.tonic_hz > 0.0) {
        return Err(Failure::usage(anyhow!("--tonic-hz must be > 0")));
    }
    let substitution =
        Substitution::Mixed { full_scale_fraction: a.full_scale_fraction, max_cents: a.detune_cents };
    match a.missing_rate {
        Some(r) => check_rate("missing rate", r, a.force)?,
        None => {
            check_rate("corruption rate", a.corruption_rate, a.force)?;
            CorruptionConfig {
                substitution_rate: a.corruption_rate,
                noise_cents: a.noise_cents,
                seed: 0,
                substitution,
            }
            .validate()?;
        }
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;

    let mut entries = Vec::new();
    for &length in &a.length {
        for i in 0..a.count {
            let seed = derive_seed(a.seed, &[length as u64, i as u64]);
            let truth = generate_sequence(&raga, length, seed)?;
            let input = match a.missing_rate {
                Some(missing_rate) => apply_missing(
                    &truth,
                    raga.scale(),
                    &MissingConfig { missing_rate, pattern: a.pattern, seed: derive_seed(seed, &[2]) },
                )?,
                None => corrupt(
                    &truth,
                    raga.scale(),
                    &CorruptionConfig {
                        substitution_rate: a.corruption_rate,
                        noise_cents: a.noise_cents,
                        seed: derive_seed(seed, &[1]),
                        substitution,
                    },
                )?,
            };
            let stem = format!("{}_{length:03}_{i:04}", raga.name());
            let input_name = format!("{stem}.txt");
            let truth_name = format!("{stem}.truth.txt");
            let name = Some(raga.name().to_string());
            SequenceFile::from_sequence(&input, a.tonic_hz, name.clone())?.write(&a.out.join(&input_name))?;
            let truth_obs = truth.iter().map(|&s| Observation::Cents(raga.cents_of(s))).collect();
            SequenceFile::new(a.tonic_hz, name, truth_obs)?.write(&a.out.join(&truth_name))?;
            entries.push(ManifestEntry { input: input_name, truth: truth_name, length, seed });
        }
    }
    let manifest = Manifest {
        schema_version: 1,
        raga: raga.name().to_string(),
        tonic_hz: a.tonic_hz,
        seed: a.seed,
        count: a.count,
        lengths: a.length.clone(),
        corruption: a.missing_rate.is_none().then_some(CorruptionManifest {
            substitution_rate: a.corruption_rate,
            noise_cents: a.noise_cents,
            substitution,
        }),
        missing: a.missing_rate.map(|missing_rate| MissingManifest { missing_rate, pattern: a.pattern }),
        sequences: entries,
    };
    // JSON rather than TOML: derived seeds use all 64 bits
    let text = serde_json::to_string_pretty(&manifest).context("serializing manifest")? + "\n";
    let path = a.out.join("manifest.json");
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} sequences to {}", manifest.sequences.len(), a.out.display());
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Outcome {
    let file = SequenceFile::read(&a.input)?;
    let seq = file.to_sequence()?;
    if seq.has_missing() {
        return Err(Failure::precondition(format!(
            "{} has MISSING values; complete it before synthesis",
            a.input.display()
        )));
    }
    let tonic = a.tonic_hz.unwrap_or(file.tonic_hz);
    let mut params = WavParams::default();
    if a.no_fade {
        params = params.without_fade();
    }
    ensure_parent(&a.out)?;
    write_wav(&a.out, &seq.observed_cents()?, tonic, &params)?;
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Outcome {
    let path = Path::new(&a.config);
    let mut cfg = if path.is_file() {
        let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        load_bench_config(&src)?
    } else if builtin_preset_names().any(|n| n == a.config) {
        builtin_preset(&a.config)?
    } else {
        let presets: Vec<&str> = builtin_preset_names().collect();
        return Err(Failure::usage(anyhow!(
            "no config file or preset named `{}` (presets: {})",
            a.config,
            presets.join(", ")
        )));
    };
    if let Some(n) = a.runs_per_length {
        cfg.runs_per_length = n;
    }
    let out = run_benchmark(&cfg)?;
    write_outputs(&a.out, &out)?;
    print!("{}", summary_table(&out.stats));
    Ok(())
}
