//! Metrics, baselines, summary statistics, and the benchmark sweep.

pub mod baselines;
pub mod bench;
pub mod metrics;
pub mod stats;

pub use baselines::{nearest_cent_baseline, random_baseline};
pub use bench::{
    builtin_preset, builtin_preset_names, load_bench_config, records_jsonl, run_benchmark, BenchConfig,
    BenchOutput, CorruptionModel, EvalRecord, Model, Task,
};
pub use metrics::{avg_linear_pitch_error, avg_pitch_error, shruti_accuracy};
pub use stats::{aggregate_stats, anova_f, cohens_d, summarize, AggregateStats, MetricSummary};
