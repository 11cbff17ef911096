mod config;

use clap::{Args, Parser, Subcommand};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use lqca_core::eval::{
    load_dataset, run_benchmark, Adapter, DatasetError, Metric, RunConfig, RunMode,
};
use lqca_core::qa::{prepare_prompt, ChatClient, ChatModel, LlmError, PromptMode, PromptSpec};
use lqca_core::representative::{BuiltinTagger, PosTagger, WireTagger};
use lqca_core::resolver::{Backend, BuiltinResolver, ChunkResolver, LlmResolver, WireResolver};
use lqca_core::segmenter::ChunkMode;
use lqca_core::{Execution, Pipeline, PipelineError};

use config::{Config, Overrides, TaggerBackend};

#[derive(Parser)]
#[command(
    name = "lqca",
    version,
    about = "Coreference-normalize long documents and ask questions about them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a document with every coreferent mention replaced by its representative.
    Rewrite(RewriteArgs),
    /// Dump chunks, mentions, pair statistics, distances, graph and clusters as JSON.
    Inspect(InspectArgs),
    /// Answer one question about a document.
    Qa(QaArgs),
    /// Run a benchmark over a JSON-lines dataset.
    Eval(EvalArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// TOML file with [pipeline], [resolver], [tagger] and [llm] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_chunk_tokens: Option<usize>,
    /// Strict edge threshold on path distances.
    #[arg(long, visible_alias = "k")]
    threshold: Option<f64>,
    /// sliding | non_overlap
    #[arg(long)]
    chunk_mode: Option<ChunkMode>,
    /// builtin | wire | llm
    #[arg(long)]
    resolver: Option<Backend>,
    #[arg(long)]
    resolver_endpoint: Option<String>,
    /// builtin | wire
    #[arg(long)]
    tagger: Option<TaggerBackend>,
    #[arg(long)]
    tagger_endpoint: Option<String>,
    /// Worker bound; 0 uses every core, 1 runs sequentially.
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct LlmArgs {
    /// Base URL of an OpenAI-compatible API.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    max_context_tokens: Option<usize>,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
}

#[derive(Args)]
struct RewriteArgs {
    /// Input file; stdin when absent or `-`.
    input: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Write the rewritten text here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write edits and the offset map as JSON here.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    input: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QaArgs {
    input: Option<PathBuf>,
    #[arg(long)]
    question: String,
    /// Answer option; repeat for multiple choice.
    #[arg(long = "choice")]
    choices: Vec<String>,
    /// lqca rewrites the context first; vanilla and cot use it as is.
    #[arg(long, default_value = "lqca")]
    mode: RunMode,
    /// Prompt style; defaults to cot for `--mode cot`, vanilla otherwise.
    #[arg(long)]
    prompt_mode: Option<PromptMode>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// longbench | leval | loogle | generic
    #[arg(long, default_value = "generic")]
    adapter: Adapter,
    #[arg(long, default_value = "lqca")]
    mode: RunMode,
    /// auto | rouge_l | f1 | accuracy
    #[arg(long, default_value = "auto")]
    metric: Metric,
    #[arg(long, default_value = "run")]
    run_id: String,
    /// JSON-lines file of per-record results, used to resume interrupted runs.
    #[arg(long)]
    results: Option<PathBuf>,
    /// Write the report JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[command(flatten)]
    llm: LlmArgs,
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
enum Failure {
    Io(String),
    Config(String),
    Transport(String),
    Integrity(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Transport(_) => 3,
            Failure::Integrity(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Config(m) | Failure::Transport(m) | Failure::Integrity(m) => {
                m
            }
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(err: PipelineError) -> Self {
        let message = err.to_string();
        match err {
            PipelineError::Config(_) => Failure::Config(message),
            _ if err.is_transport() => Failure::Transport(message),
            _ => Failure::Integrity(message),
        }
    }
}

impl From<LlmError> for Failure {
    fn from(err: LlmError) -> Self {
        let message = format!("llm: {err}");
        match err {
            LlmError::Config(_) => Failure::Config(message),
            LlmError::Transport(_) | LlmError::Status { .. } => Failure::Transport(message),
            LlmError::Decode(_) => Failure::Integrity(message),
        }
    }
}

impl PipelineArgs {
    fn overrides(&self, llm: Option<&LlmArgs>) -> Overrides {
        Overrides {
            max_chunk_tokens: self.max_chunk_tokens,
            threshold: self.threshold,
            chunk_mode: self.chunk_mode,
            parallelism: self.parallelism,
            resolver: self.resolver,
            resolver_endpoint: self.resolver_endpoint.clone(),
            tagger: self.tagger,
            tagger_endpoint: self.tagger_endpoint.clone(),
            endpoint: llm.and_then(|l| l.endpoint.clone()),
            model: llm.and_then(|l| l.model.clone()),
            max_context_tokens: llm.and_then(|l| l.max_context_tokens),
            api_key_env: llm.and_then(|l| l.api_key_env.clone()),
        }
    }

    fn load(&self, llm: Option<&LlmArgs>) -> Result<Config, Failure> {
        config::resolve(self.config.as_deref(), self.overrides(llm)).map_err(Failure::Config)
    }
}

fn read_input(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::Io(format!("cannot read stdin: {e}")))?;
            Ok(text)
        }
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(format!("cannot write stdout: {e}")))
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization");
    text.push('\n');
    text
}

fn chat_client(config: &Config) -> Result<Arc<ChatClient>, Failure> {
    Ok(Arc::new(ChatClient::new(config.llm.clone())?))
}

fn build_pipeline(config: &Config) -> Result<Pipeline, Failure> {
    let resolver: Box<dyn ChunkResolver> = match config.resolver.backend {
        Backend::Builtin => Box::new(BuiltinResolver),
        Backend::Wire => Box::new(WireResolver::new(config.resolver.wire())),
        Backend::Llm => Box::new(LlmResolver::new(chat_client(config)?)),
    };
    let tagger: Box<dyn PosTagger> = match config.tagger.backend {
        TaggerBackend::Builtin => Box::new(BuiltinTagger),
        TaggerBackend::Wire => Box::new(WireTagger::new(
            &config.tagger.endpoint,
            Duration::from_millis(config.tagger.timeout_ms),
            config.tagger.retry.clone(),
        )),
    };
    Ok(Pipeline::new(config.pipeline, resolver, tagger)?)
}

fn rewrite(args: RewriteArgs) -> Result<(), Failure> {
    let config = args.pipeline.load(None)?;
    let pipeline = build_pipeline(&config)?;
    let text = read_input(args.input.as_deref())?;
    let rewrite = pipeline.rewrite(&text)?;
    log::info!(
        "{} chunk(s), {} cluster(s), {} edit(s), {} dropped",
        rewrite.analysis.chunks.len(),
        rewrite.analysis.clusters.len(),
        rewrite.edits.len(),
        rewrite.dropped_edits.len()
    );
    if let Some(path) = &args.sidecar {
        let sidecar = serde_json::json!({
            "edits": rewrite.edits,
            "dropped_edits": rewrite.dropped_edits,
            "offset_map": rewrite.result.offset_map,
        });
        write_output(Some(path), &to_json(&sidecar))?;
    }
    write_output(args.out.as_deref(), &rewrite.result.text)
}

fn inspect(args: InspectArgs) -> Result<(), Failure> {
    let mut config = args.pipeline.load(None)?;
    config.pipeline.prune_distances = false;
    let pipeline = build_pipeline(&config)?;
    let text = read_input(args.input.as_deref())?;
    let analysis = pipeline.analyze(&text)?;
    write_output(args.out.as_deref(), &to_json(&analysis))
}

fn qa(args: QaArgs) -> Result<(), Failure> {
    let config = args.pipeline.load(Some(&args.llm))?;
    let client = chat_client(&config)?;
    let text = read_input(args.input.as_deref())?;
    let context = match args.mode {
        RunMode::Lqca => build_pipeline(&config)?.rewrite(&text)?.result.text,
        RunMode::Vanilla | RunMode::Cot => text,
    };
    let mode = args.prompt_mode.unwrap_or(match args.mode {
        RunMode::Cot => PromptMode::Cot,
        _ => PromptMode::Vanilla,
    });
    let spec = PromptSpec {
        mode,
        context,
        question: args.question,
        choices: (!args.choices.is_empty()).then_some(args.choices),
    };
    let answer = client.complete(&prepare_prompt(&spec, config.llm.max_context_tokens))?;
    write_output(None, &format!("{answer}\n"))
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let config = args.pipeline.load(Some(&args.llm))?;
    let client = chat_client(&config)?;
    let pipeline = build_pipeline(&config)?;
    let dataset = load_dataset(&args.dataset, args.adapter).map_err(|e| match e {
        DatasetError::Io { .. } | DatasetError::Empty { .. } => Failure::Config(e.to_string()),
    })?;
    for skipped in &dataset.skipped {
        log::warn!(
            "{}:{}: skipped ({})",
            args.dataset.display(),
            skipped.line,
            skipped.reason
        );
    }
    let run = RunConfig {
        run_id: args.run_id,
        mode: args.mode,
        metric: args.metric,
        max_context_tokens: config.llm.max_context_tokens,
        results_path: args.results,
        execution: Execution::with_parallelism(config.llm.max_in_flight.max(1)),
    };
    let report = run_benchmark(&dataset.records, &pipeline, client.as_ref(), &run)
        .map_err(|e| Failure::Io(e.to_string()))?;
    if let Some(path) = &args.out {
        write_output(Some(path), &to_json(&report))?;
    }
    write_output(None, &report.table())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Rewrite(args) => rewrite(args),
        Command::Inspect(args) => inspect(args),
        Command::Qa(args) => qa(args),
        Command::Eval(args) => eval(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("lqca: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
