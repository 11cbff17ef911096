use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use thiserror::Error;

use super::dataset::EvalRecord;
use super::metrics::{choice_accuracy, qa_f1, rouge_l};
use crate::par::Execution;
use crate::pipeline::Pipeline;
use crate::qa::{prepare_prompt, ChatModel, PromptMode, PromptSpec};

/// What the model sees: the rewritten context with a plain prompt, or the
/// original context with a plain or step-by-step prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    #[default]
    Lqca,
    Vanilla,
    Cot,
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Lqca => "lqca",
            RunMode::Vanilla => "vanilla",
            RunMode::Cot => "cot",
        })
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lqca" => Ok(RunMode::Lqca),
            "vanilla" => Ok(RunMode::Vanilla),
            "cot" => Ok(RunMode::Cot),
            other => Err(format!(
                "unknown mode `{other}` (expected lqca | vanilla | cot)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Accuracy for records with choices, F1 otherwise.
    #[default]
    Auto,
    RougeL,
    F1,
    Accuracy,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Auto => "auto",
            Metric::RougeL => "rouge_l",
            Metric::F1 => "f1",
            Metric::Accuracy => "accuracy",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Metric::Auto),
            "rouge_l" | "rouge-l" => Ok(Metric::RougeL),
            "f1" => Ok(Metric::F1),
            "accuracy" => Ok(Metric::Accuracy),
            other => Err(format!(
                "unknown metric `{other}` (expected auto | rouge_l | f1 | accuracy)"
            )),
        }
    }
}

impl Metric {
    /// The concrete metric used for `record`.
    pub fn resolve(self, record: &EvalRecord) -> Metric {
        match self {
            Metric::Auto if record.choices.is_some() => Metric::Accuracy,
            Metric::Auto => Metric::F1,
            other => other,
        }
    }
}

/// Scores `prediction` for `record` under a concrete metric. Returns the
/// score and whether a multiple-choice answer could not be parsed.
pub fn score(metric: Metric, prediction: &str, record: &EvalRecord) -> (f64, bool) {
    match metric.resolve(record) {
        Metric::RougeL => {
            let best = record
                .gold_answers
                .iter()
                .map(|g| rouge_l(prediction, g))
                .fold(0.0, f64::max);
            (best, false)
        }
        Metric::Accuracy => {
            let count = record.choices.as_ref().map_or(5, Vec::len);
            let s = choice_accuracy(prediction, &record.gold_answers[0], count);
            (s.score, s.unparsed)
        }
        _ => (qa_f1(prediction, &record.gold_answers), false),
    }
}

/// Five equal-width buckets over `[0, 1]`; the last one is closed.
pub fn position_bucket(fraction: f64) -> usize {
    ((fraction.clamp(0.0, 1.0) * 5.0).floor() as usize).min(4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordResult {
    pub run_id: String,
    pub record_id: String,
    pub mode: RunMode,
    pub metric: Metric,
    pub score: Option<f64>,
    pub prediction: Option<String>,
    #[serde(default)]
    pub unparsed: bool,
    pub error: Option<String>,
    pub answer_position_fraction: Option<f64>,
}

impl RecordResult {
    pub fn succeeded(&self) -> bool {
        self.error.is_none() && self.score.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Metric,
    pub count: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketSummary {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub run_id: String,
    pub mode: RunMode,
    pub total: usize,
    pub scored: usize,
    pub failed: usize,
    pub unparsed: usize,
    /// Mean over every scored record.
    pub mean: Option<f64>,
    pub per_metric: Vec<MetricSummary>,
    /// Present when some record carries an answer position.
    pub buckets: Option<Vec<BucketSummary>>,
    pub records: Vec<RecordResult>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl MetricsReport {
    /// Aggregates `records` (already in dataset order).
    pub fn from_results(run_id: &str, mode: RunMode, records: Vec<RecordResult>) -> Self {
        let scored: Vec<&RecordResult> = records.iter().filter(|r| r.succeeded()).collect();
        let mut by_metric: BTreeMap<Metric, Vec<f64>> = BTreeMap::new();
        for r in &scored {
            by_metric
                .entry(r.metric)
                .or_default()
                .push(r.score.unwrap());
        }
        let per_metric = by_metric
            .into_iter()
            .map(|(metric, scores)| MetricSummary {
                metric,
                count: scores.len(),
                mean: mean(scores).unwrap_or(0.0),
            })
            .collect();
        let buckets = scored
            .iter()
            .any(|r| r.answer_position_fraction.is_some())
            .then(|| {
                (0..5)
                    .map(|b| {
                        let in_bucket: Vec<f64> = scored
                            .iter()
                            .filter(|r| {
                                r.answer_position_fraction
                                    .is_some_and(|f| position_bucket(f) == b)
                            })
                            .map(|r| r.score.unwrap())
                            .collect();
                        BucketSummary {
                            lower: b as f64 / 5.0,
                            upper: (b + 1) as f64 / 5.0,
                            count: in_bucket.len(),
                            mean: mean(in_bucket),
                        }
                    })
                    .collect()
            });
        Self {
            run_id: run_id.to_string(),
            mode,
            total: records.len(),
            scored: scored.len(),
            failed: records.len() - scored.len(),
            unparsed: scored.iter().filter(|r| r.unparsed).count(),
            mean: mean(scored.iter().map(|r| r.score.unwrap())),
            per_metric,
            buckets,
            records,
        }
    }

    /// Plain-text summary table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.2}", v * 100.0));
        let _ = writeln!(out, "run {} (mode {})", self.run_id, self.mode);
        let _ = writeln!(
            out,
            "records {}  scored {}  failed {}  unparsed {}",
            self.total, self.scored, self.failed, self.unparsed
        );
        let _ = writeln!(out, "{:<12} {:>7} {:>8}", "metric", "count", "score");
        for m in &self.per_metric {
            let _ = writeln!(
                out,
                "{:<12} {:>7} {:>8}",
                m.metric.to_string(),
                m.count,
                pct(Some(m.mean))
            );
        }
        let _ = writeln!(
            out,
            "{:<12} {:>7} {:>8}",
            "all",
            self.scored,
            pct(self.mean)
        );
        if let Some(buckets) = &self.buckets {
            let _ = writeln!(out, "{:<12} {:>7} {:>8}", "position", "count", "score");
            for b in buckets {
                let close = if b.upper >= 1.0 { ']' } else { ')' };
                let label = format!("[{:.1},{:.1}{close}", b.lower, b.upper);
                let _ = writeln!(out, "{:<12} {:>7} {:>8}", label, b.count, pct(b.mean));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub run_id: String,
    pub mode: RunMode,
    pub metric: Metric,
    pub max_context_tokens: usize,
    /// JSON-lines file of per-record results; records already answered
    /// successfully under `run_id` are not asked again.
    pub results_path: Option<PathBuf>,
    /// Concurrent records.
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            run_id: "run".to_string(),
            mode: RunMode::Lqca,
            metric: Metric::Auto,
            max_context_tokens: 128_000,
            results_path: None,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("results file {path}: {source}")]
    Results {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn results_error(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Results {
        path: path.to_path_buf(),
        source,
    }
}

/// Successful results of `run_id` already stored in `path`.
fn load_finished(path: &Path, run_id: &str) -> Result<HashMap<String, RecordResult>, EvalError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(HashMap::new()),
        Err(e) => return Err(results_error(path)(e)),
    };
    let mut done = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(results_error(path))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RecordResult>(&line) {
            Ok(r) if r.run_id == run_id && r.succeeded() => {
                done.insert(r.record_id.clone(), r);
            }
            Ok(_) => {}
            Err(e) => log::warn!(
                "{}:{}: ignoring unreadable result ({e})",
                path.display(),
                i + 1
            ),
        }
    }
    Ok(done)
}

fn answer(
    record: &EvalRecord,
    pipeline: &Pipeline,
    model: &dyn ChatModel,
    config: &RunConfig,
) -> Result<String, String> {
    let context = match config.mode {
        RunMode::Lqca => {
            pipeline
                .rewrite(&record.context)
                .map_err(|e| e.to_string())?
                .result
                .text
        }
        RunMode::Vanilla | RunMode::Cot => record.context.clone(),
    };
    let spec = PromptSpec {
        mode: if config.mode == RunMode::Cot {
            PromptMode::Cot
        } else {
            PromptMode::Vanilla
        },
        context,
        question: record.question.clone(),
        choices: record.choices.clone(),
    };
    model
        .complete(&prepare_prompt(&spec, config.max_context_tokens))
        .map_err(|e| e.to_string())
}

/// Answers and scores every record. A failing record is kept with its error
/// and the run goes on.
pub fn run_benchmark(
    records: &[EvalRecord],
    pipeline: &Pipeline,
    model: &dyn ChatModel,
    config: &RunConfig,
) -> Result<MetricsReport, EvalError> {
    let mut finished = match &config.results_path {
        Some(path) => load_finished(path, &config.run_id)?,
        None => HashMap::new(),
    };
    if !finished.is_empty() {
        log::info!(
            "resuming run {}: {} record(s) already scored",
            config.run_id,
            finished.len()
        );
    }
    let sink = match &config.results_path {
        Some(path) => Some(Mutex::new(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(results_error(path))?,
        )),
        None => None,
    };

    let pending: Vec<&EvalRecord> = records
        .iter()
        .filter(|r| !finished.contains_key(&r.id))
        .collect();
    let fresh = config.execution.map(&pending, |record| {
        let metric = config.metric.resolve(record);
        let outcome = answer(record, pipeline, model, config);
        let result = match outcome {
            Ok(prediction) => {
                let (s, unparsed) = score(metric, &prediction, record);
                RecordResult {
                    run_id: config.run_id.clone(),
                    record_id: record.id.clone(),
                    mode: config.mode,
                    metric,
                    score: Some(s),
                    prediction: Some(prediction),
                    unparsed,
                    error: None,
                    answer_position_fraction: record.answer_position_fraction,
                }
            }
            Err(error) => {
                log::warn!("record {}: {error}", record.id);
                RecordResult {
                    run_id: config.run_id.clone(),
                    record_id: record.id.clone(),
                    mode: config.mode,
                    metric,
                    score: None,
                    prediction: None,
                    unparsed: false,
                    error: Some(error),
                    answer_position_fraction: record.answer_position_fraction,
                }
            }
        };
        if let Some(sink) = &sink {
            let line = serde_json::to_string(&result).expect("results serialize");
            let mut file = sink.lock().unwrap_or_else(|e| e.into_inner());
            if let Err(e) = writeln!(file, "{line}") {
                log::warn!("could not persist result of record {}: {e}", record.id);
            }
        }
        result
    });
    for r in fresh {
        finished.insert(r.record_id.clone(), r);
    }
    let ordered = records
        .iter()
        .filter_map(|r| finished.remove(&r.id))
        .collect();
    Ok(MetricsReport::from_results(
        &config.run_id,
        config.mode,
        ordered,
    ))
}
