use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

/// One question over one context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    pub context: String,
    pub question: String,
    /// For multiple-choice records, the gold letter.
    pub gold_answers: Vec<String>,
    #[serde(default)]
    pub choices: Option<Vec<String>>,
    /// Where in the context the answer sits, as a fraction of its length.
    #[serde(default)]
    pub answer_position_fraction: Option<f64>,
}

impl EvalRecord {
    fn validate(&self) -> Result<(), String> {
        if self.question.trim().is_empty() {
            return Err("question is empty".into());
        }
        if self.gold_answers.is_empty() {
            return Err("no gold answer".into());
        }
        if let Some(f) = self.answer_position_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(format!("answer_position_fraction {f} is outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Field layout of the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adapter {
    /// `_id`, `context`, `input` (question), `answers`, `all_classes`.
    Longbench,
    /// `input` (document) with parallel `instructions` and `outputs`; one
    /// record per instruction.
    Leval,
    /// `id`/`doc_id`, `context`/`input`, `question`/`Q`, `answer`/`A`.
    Loogle,
    /// [`EvalRecord`] fields verbatim.
    #[default]
    Generic,
}

impl fmt::Display for Adapter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Adapter::Longbench => "longbench",
            Adapter::Leval => "leval",
            Adapter::Loogle => "loogle",
            Adapter::Generic => "generic",
        })
    }
}

impl FromStr for Adapter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "longbench" => Ok(Adapter::Longbench),
            "leval" => Ok(Adapter::Leval),
            "loogle" => Ok(Adapter::Loogle),
            "generic" => Ok(Adapter::Generic),
            other => Err(format!(
                "unknown adapter `{other}` (expected longbench | leval | loogle | generic)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} holds no valid records ({skipped} line(s) skipped)")]
    Empty { path: PathBuf, skipped: usize },
}

/// A line that could not be turned into a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub records: Vec<EvalRecord>,
    pub skipped: Vec<SkippedLine>,
}

fn string_field(v: &Value, keys: &[&str]) -> Option<String> {
    keys.iter().find_map(|k| match v.get(k)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    })
}

fn required(v: &Value, keys: &[&str]) -> Result<String, String> {
    string_field(v, keys).ok_or_else(|| format!("missing field `{}`", keys[0]))
}

fn string_list(v: &Value, key: &str) -> Option<Vec<String>> {
    match v.get(key)? {
        Value::Array(items) => Some(
            items
                .iter()
                .filter_map(|x| x.as_str().map(String::from))
                .collect(),
        ),
        Value::String(s) => Some(vec![s.clone()]),
        _ => None,
    }
}

fn from_longbench(v: &Value, line: usize) -> Result<Vec<EvalRecord>, String> {
    Ok(vec![EvalRecord {
        id: string_field(v, &["_id", "id"]).unwrap_or_else(|| format!("line-{line}")),
        context: required(v, &["context"])?,
        question: required(v, &["input"])?,
        gold_answers: string_list(v, "answers").unwrap_or_default(),
        choices: string_list(v, "all_classes").filter(|c| !c.is_empty()),
        answer_position_fraction: None,
    }])
}

fn from_leval(v: &Value, line: usize) -> Result<Vec<EvalRecord>, String> {
    let context = required(v, &["input"])?;
    let instructions = string_list(v, "instructions").ok_or("missing field `instructions`")?;
    let outputs = string_list(v, "outputs").ok_or("missing field `outputs`")?;
    if instructions.len() != outputs.len() {
        return Err(format!(
            "{} instructions but {} outputs",
            instructions.len(),
            outputs.len()
        ));
    }
    let base = string_field(v, &["id"]).unwrap_or_else(|| format!("line-{line}"));
    Ok(instructions
        .into_iter()
        .zip(outputs)
        .enumerate()
        .map(|(i, (question, answer))| EvalRecord {
            id: format!("{base}-{i}"),
            context: context.clone(),
            question,
            gold_answers: vec![answer],
            choices: None,
            answer_position_fraction: None,
        })
        .collect())
}

fn from_loogle(v: &Value, line: usize) -> Result<Vec<EvalRecord>, String> {
    Ok(vec![EvalRecord {
        id: string_field(v, &["id", "doc_id"]).unwrap_or_else(|| format!("line-{line}")),
        context: required(v, &["context", "input"])?,
        question: required(v, &["question", "Q"])?,
        gold_answers: string_list(v, "answer")
            .or_else(|| string_list(v, "A"))
            .unwrap_or_default(),
        choices: None,
        answer_position_fraction: None,
    }])
}

fn parse_line(adapter: Adapter, line: &str, number: usize) -> Result<Vec<EvalRecord>, String> {
    let records = match adapter {
        Adapter::Generic => {
            vec![serde_json::from_str::<EvalRecord>(line).map_err(|e| e.to_string())?]
        }
        _ => {
            let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
            if !v.is_object() {
                return Err("not a JSON object".into());
            }
            match adapter {
                Adapter::Longbench => from_longbench(&v, number)?,
                Adapter::Leval => from_leval(&v, number)?,
                Adapter::Loogle => from_loogle(&v, number)?,
                Adapter::Generic => unreachable!(),
            }
        }
    };
    for r in &records {
        r.validate().map_err(|e| format!("record {}: {e}", r.id))?;
    }
    Ok(records)
}

/// Parses JSON-lines `content`; bad lines are skipped and reported.
pub fn parse_dataset(content: &str, adapter: Adapter) -> Dataset {
    let mut dataset = Dataset {
        records: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, line) in content.lines().enumerate() {
        let number = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(adapter, line, number) {
            Ok(records) => dataset.records.extend(records),
            Err(reason) => {
                log::warn!("line {number}: skipped ({reason})");
                dataset.skipped.push(SkippedLine {
                    line: number,
                    reason,
                });
            }
        }
    }
    dataset
}

/// Reads a JSON-lines file through `adapter`. Fails when the file cannot be
/// read or yields no record.
pub fn load_dataset(path: &Path, adapter: Adapter) -> Result<Dataset, DatasetError> {
    let content = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let dataset = parse_dataset(&content, adapter);
    if dataset.records.is_empty() {
        return Err(DatasetError::Empty {
            path: path.to_path_buf(),
            skipped: dataset.skipped.len(),
        });
    }
    Ok(dataset)
}
