//! Run configuration: defaults, overridden by a TOML file, overridden by
//! command-line flags.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use lqca_core::qa::LlmConfig;
use lqca_core::resolver::{Backend, WireResolverConfig};
use lqca_core::segmenter::ChunkMode;
use lqca_core::{PipelineConfig, RetryPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaggerBackend {
    #[default]
    Builtin,
    Wire,
}

impl fmt::Display for TaggerBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaggerBackend::Builtin => "builtin",
            TaggerBackend::Wire => "wire",
        })
    }
}

impl FromStr for TaggerBackend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "builtin" => Ok(TaggerBackend::Builtin),
            "wire" => Ok(TaggerBackend::Wire),
            other => Err(format!(
                "unknown tagger `{other}` (expected builtin | wire)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolverSection {
    pub backend: Backend,
    pub endpoint: String,
    pub timeout_ms: u64,
    pub retry: RetryPolicy,
    pub serial: bool,
}

impl Default for ResolverSection {
    fn default() -> Self {
        let wire = WireResolverConfig::default();
        Self {
            backend: Backend::Builtin,
            endpoint: wire.endpoint,
            timeout_ms: wire.timeout_ms,
            retry: wire.retry,
            serial: wire.serial,
        }
    }
}

impl ResolverSection {
    pub fn wire(&self) -> WireResolverConfig {
        WireResolverConfig {
            endpoint: self.endpoint.clone(),
            timeout_ms: self.timeout_ms,
            retry: self.retry.clone(),
            serial: self.serial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaggerSection {
    pub backend: TaggerBackend,
    pub endpoint: String,
    pub timeout_ms: u64,
    pub retry: RetryPolicy,
}

impl Default for TaggerSection {
    fn default() -> Self {
        Self {
            backend: TaggerBackend::Builtin,
            endpoint: "http://127.0.0.1:8765".to_string(),
            timeout_ms: 60_000,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub pipeline: PipelineConfig,
    pub resolver: ResolverSection,
    pub tagger: TaggerSection,
    pub llm: LlmConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }
}

/// Flag values; `None` keeps whatever the file or the defaults say.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub max_chunk_tokens: Option<usize>,
    pub threshold: Option<f64>,
    pub chunk_mode: Option<ChunkMode>,
    pub parallelism: Option<usize>,
    pub resolver: Option<Backend>,
    pub resolver_endpoint: Option<String>,
    pub tagger: Option<TaggerBackend>,
    pub tagger_endpoint: Option<String>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub max_context_tokens: Option<usize>,
    pub api_key_env: Option<String>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Overrides {
    pub fn apply(self, config: &mut Config) {
        let p = &mut config.pipeline;
        set(&mut p.max_chunk_tokens, self.max_chunk_tokens);
        set(&mut p.threshold, self.threshold);
        set(&mut p.chunk_mode, self.chunk_mode);
        set(&mut p.parallelism, self.parallelism);
        set(&mut config.resolver.backend, self.resolver);
        set(&mut config.resolver.endpoint, self.resolver_endpoint);
        set(&mut config.tagger.backend, self.tagger);
        set(&mut config.tagger.endpoint, self.tagger_endpoint);
        let l = &mut config.llm;
        set(&mut l.endpoint, self.endpoint);
        set(&mut l.model, self.model);
        set(&mut l.max_context_tokens, self.max_context_tokens);
        set(&mut l.api_key_env, self.api_key_env);
    }
}

/// Defaults, then `file` if given, then `overrides`.
pub fn resolve(file: Option<&Path>, overrides: Overrides) -> Result<Config, String> {
    let mut config = match file {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    overrides.apply(&mut config);
    config.pipeline.validate().map_err(|e| e.to_string())?;
    config.llm.validate().map_err(|e| e.to_string())?;
    Ok(config)
}
