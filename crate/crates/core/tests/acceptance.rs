//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use shruti_core::datagen::{corrupt, derive_seed, generate_sequence, CorruptionConfig, MissingPattern};
use shruti_core::eval::{
    builtin_preset, records_jsonl, run_benchmark, AggregateStats, BenchConfig, Model, Task,
};
use shruti_core::raga::{builtin, grammar_compliance};
use shruti_core::wav::{write_wav, WavParams};
use shruti_core::{HmmModel, ShrutiFst};

const RAGAS: [&str; 5] = ["yaman", "bhairavi", "bilaval", "kalyan", "khamaaj"];

type Verdict = (bool, String);

fn accuracy(
    stats: &AggregateStats,
    task: Task,
    raga: &str,
    rate: f64,
    pattern: Option<MissingPattern>,
    model: Model,
) -> (f64, usize) {
    let cell =
        stats.cell(task, raga, rate, pattern).unwrap_or_else(|| panic!("no cell for {raga} at {rate}"));
    let m = cell.models.iter().find(|m| m.model == model).expect("model in cell");
    (100.0 * m.accuracy.mean, m.accuracy.n)
}

fn pitch_error(stats: &AggregateStats, model: Model) -> f64 {
    let cell = stats.cell(Task::Correction, "yaman", 0.4, None).expect("table1 cell");
    cell.models.iter().find(|m| m.model == model).unwrap().pitch_error.mean
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let cases = 240;
    let failures: Vec<String> = (0..cases as u64)
        .into_par_iter()
        .filter_map(|i| common::check_instance(derive_seed(0x0AC1E, &[i])).err())
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let ok = failures.is_empty() && secs < 60.0;
    let first = failures.first().map(|f| format!("; first: {f}")).unwrap_or_default();
    (ok, format!("{cases} cases, {} disagreements, {secs:.1}s{first}", failures.len()))
}

fn grammar_safety(table1: &BenchConfig) -> Verdict {
    let ragas: Vec<_> = RAGAS.iter().map(|n| builtin(n).unwrap()).collect();
    let fsts: Vec<_> = ragas.iter().map(ShrutiFst::with_defaults).collect();
    let hmms: Vec<_> = ragas.iter().map(|r| HmmModel::build(r, 25.0).unwrap()).collect();
    let runs = 10_000u64;
    let violations: Vec<String> = (0..runs)
        .into_par_iter()
        .filter_map(|i| {
            let seed = derive_seed(0x5AFE, &[i]);
            let mut rng = common::rng(seed);
            let k = (i % 5) as usize;
            let len = rng.random_range(2..=100);
            let truth = generate_sequence(&ragas[k], len, seed).unwrap();
            let cfg = CorruptionConfig {
                substitution_rate: rng.random_range(0.0..=0.5),
                seed,
                ..table1.corruption.to_config(0.0, 0)
            };
            let seq = corrupt(&truth, ragas[k].scale(), &cfg).unwrap();
            let f = fsts[k].correct(&seq).map(|c| grammar_compliance(&c.output, &ragas[k]));
            let h = hmms[k].viterbi(&seq).map(|v| grammar_compliance(&v.path, &ragas[k]));
            match (f, h) {
                (Ok(a), Ok(b)) if a == 1.0 && b == 1.0 => None,
                (f, h) => Some(format!("run {i} ({}): fst {f:?}, hmm {h:?}", RAGAS[k])),
            }
        })
        .collect();
    let first = violations.first().map(|v| format!("; first: {v}")).unwrap_or_default();
    (violations.is_empty(), format!("{runs} runs x 2 decoders, {} violations{first}", violations.len()))
}

fn table1_ordering(stats: &AggregateStats) -> Verdict {
    let acc = |m| accuracy(stats, Task::Correction, "yaman", 0.4, None, m);
    let (f, n) = acc(Model::Fst);
    let (c, _) = acc(Model::NearestCent);
    let (h, _) = acc(Model::Hmm);
    let (r, _) = acc(Model::Random);
    let chance = 100.0 / builtin("yaman").unwrap().num_active() as f64;
    let ok = f > c
        && c > h
        && h > r
        && (87.0..=95.0).contains(&f)
        && (85.0..=93.0).contains(&c)
        && (78.0..=90.0).contains(&h)
        && (r - chance).abs() <= 3.0;
    (ok, format!("n={n}: FST {f:.1} > Nearest {c:.1} > HMM {h:.1} > Random {r:.1} (chance {chance:.1})"))
}

fn table1_error(stats: &AggregateStats) -> Verdict {
    let f = pitch_error(stats, Model::Fst);
    let h = pitch_error(stats, Model::Hmm);
    (f <= 60.0 && f < h, format!("FST {f:.1} cents, HMM {h:.1} cents"))
}

fn cross_raga(stats: &AggregateStats) -> Verdict {
    let accs: Vec<f64> =
        RAGAS.iter().map(|r| accuracy(stats, Task::Correction, r, 0.4, None, Model::Fst).0).collect();
    let (lo, hi) = accs.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    let listing: Vec<String> = RAGAS.iter().zip(&accs).map(|(r, a)| format!("{r} {a:.1}")).collect();
    (hi - lo <= 4.0, format!("spread {:.1}pp at 0.4: {}", hi - lo, listing.join(", ")))
}

fn degradation(stats: &AggregateStats) -> Verdict {
    let band = 84.0..=95.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for r in RAGAS {
        let a2 = accuracy(stats, Task::Correction, r, 0.2, None, Model::Fst).0;
        let a4 = accuracy(stats, Task::Correction, r, 0.4, None, Model::Fst).0;
        ok &= a2 >= a4 && band.contains(&a2) && band.contains(&a4);
        parts.push(format!("{r} {a2:.1}->{a4:.1}"));
    }
    (ok, format!("FST at 0.2 -> 0.4: {}", parts.join(", ")))
}

fn table2_pattern() -> Verdict {
    let cfg = builtin_preset("table2").unwrap();
    let out = run_benchmark(&cfg).unwrap();
    let rate = cfg.rates[0];
    let acc = |p| accuracy(&out.stats, Task::Completion, "yaman", rate, Some(p), Model::Hmm);
    let (s, n) = acc(MissingPattern::Structured);
    let (r, _) = acc(MissingPattern::Random);
    let (c, _) = acc(MissingPattern::Clustered);
    let ok = s > r && r > c && s >= 70.0 && n >= 300;
    (ok, format!("HMM at rate {rate}, n={n}: structured {s:.1} > random {r:.1} > clustered {c:.1}"))
}

fn median_time(iters: usize, mut f: impl FnMut()) -> Duration {
    for _ in 0..iters / 10 {
        f();
    }
    let mut times: Vec<Duration> = (0..iters)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .collect();
    times.sort();
    times[iters / 2]
}

fn performance(table1: &BenchConfig) -> Verdict {
    let raga = builtin("yaman").unwrap();
    let truth = generate_sequence(&raga, 100, 11).unwrap();
    let seq = corrupt(&truth, raga.scale(), &table1.corruption.to_config(0.4, 11)).unwrap();
    let fst = ShrutiFst::with_defaults(&raga);
    let hmm = HmmModel::build(&raga, 25.0).unwrap();
    let lattice = fst.lattice(&seq).unwrap();
    let t_fst = median_time(301, || {
        std::hint::black_box(fst.correct(&seq).unwrap());
    });
    let t_build = median_time(301, || {
        std::hint::black_box(fst.lattice(&seq).unwrap());
    });
    let t_search = median_time(301, || {
        std::hint::black_box(fst.search(&lattice).unwrap());
    });
    let t_hmm = median_time(301, || {
        std::hint::black_box(hmm.viterbi(&seq).unwrap());
    });
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    let speedup = t_hmm.as_secs_f64() / t_fst.as_secs_f64();
    let ok = ms(t_fst) < 5.0 && ms(t_hmm) < 50.0 && speedup >= 10.0;
    let profile = if cfg!(debug_assertions) { "debug" } else { "optimized" };
    (
        ok,
        format!(
            "T=100 ({profile}): FST {:.3} ms (lattice {:.3} + search {:.3}), HMM Viterbi {:.3} ms, HMM/FST {speedup:.2}x (need >= 10x)",
            ms(t_fst),
            ms(t_build),
            ms(t_search),
            ms(t_hmm)
        ),
    )
}

fn determinism(table1: &BenchConfig, first: &str) -> Verdict {
    let again = records_jsonl(&run_benchmark(table1).unwrap().records).unwrap();
    let lines = first.lines().count();
    (
        first.as_bytes() == again.as_bytes(),
        format!("two table1 runs, {lines} records, {} bytes each", first.len()),
    )
}

fn wav_conformance() -> Verdict {
    let cents = [0.0, 204.0, 386.0, 702.0, 1088.0];
    let tonic = 261.63;
    let p = WavParams::default();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("five.wav");
    write_wav(&path, &cents, tonic, &p).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let data_len = (cents.len() * p.frames_per_note * 4) as u32;
    let header_ok = &bytes[0..4] == b"RIFF"
        && u32_at(4) as usize == bytes.len() - 8
        && &bytes[8..16] == b"WAVEfmt "
        && u32_at(16) == 16
        && u16_at(20) == 1
        && u16_at(22) == 2
        && u32_at(24) == 44_100
        && u32_at(28) == 44_100 * 4
        && u16_at(32) == 4
        && u16_at(34) == 16
        && &bytes[36..40] == b"data"
        && u32_at(40) == data_len
        && bytes.len() == 44 + data_len as usize;

    let n = p.frames_per_note;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut peaks = Vec::new();
    let mut peaks_ok = true;
    for (k, &c) in cents.iter().enumerate() {
        let mut buf: Vec<Complex<f64>> = (0..n)
            .map(|f| {
                let i = 44 + (k * n + f) * 4;
                Complex::new(i16::from_le_bytes([bytes[i], bytes[i + 1]]) as f64, 0.0)
            })
            .collect();
        fft.process(&mut buf);
        let peak = (1..n / 2).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm())).unwrap();
        let hz = tonic * 2f64.powf(c / 1200.0);
        let expected = hz * n as f64 / 44_100.0;
        peaks_ok &= (peak as f64 - expected).abs() <= 1.0;
        peaks.push(format!("{hz:.1}Hz bin {peak} (exp {expected:.1})"));
    }
    (
        header_ok && peaks_ok,
        format!("header {}, peaks: {}", if header_ok { "ok" } else { "BAD" }, peaks.join(", ")),
    )
}

fn run(name: &str, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        (false, format!("panicked: {msg}"))
    });
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
    ok
}

fn main() {
    let table1 = builtin_preset("table1").unwrap();
    let t1 = run_benchmark(&table1).unwrap();
    let t1_records = records_jsonl(&t1.records).unwrap();
    let mut sweep = builtin_preset("robustness").unwrap();
    sweep.rates = vec![0.2, 0.4];
    sweep.runs_per_length = table1.runs_per_length;
    let sweep = run_benchmark(&sweep).unwrap();

    println!();
    let results = [
        run("oracle equivalence", oracle_equivalence),
        run("grammar safety", || grammar_safety(&table1)),
        run("table1 ordering and bands", || table1_ordering(&t1.stats)),
        run("table1 pitch error", || table1_error(&t1.stats)),
        run("cross-raga stability", || cross_raga(&sweep.stats)),
        run("graceful degradation", || degradation(&sweep.stats)),
        run("completion pattern ordering", table2_pattern),
        run("performance envelope", || performance(&table1)),
        run("determinism", || determinism(&table1, &t1_records)),
        run("wav conformance", wav_conformance),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("\nacceptance: {passed}/{} criteria passed\n", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
