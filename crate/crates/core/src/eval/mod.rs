//! Benchmark loading, answer scoring and the evaluation harness.

mod dataset;
mod harness;
mod metrics;

pub use dataset::{
    load_dataset, parse_dataset, Adapter, Dataset, DatasetError, EvalRecord, SkippedLine,
};
pub use harness::{
    position_bucket, run_benchmark, score, BucketSummary, EvalError, Metric, MetricSummary,
    MetricsReport, RecordResult, RunConfig, RunMode,
};
pub use metrics::{choice_accuracy, extract_choice, normalize_answer, qa_f1, rouge_l, ChoiceScore};
