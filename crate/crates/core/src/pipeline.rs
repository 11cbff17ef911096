use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::merge::{
    self, build_graph, components, DistanceEntry, GlobalCluster, GlobalMention, MaxProductOptions,
    MentionGraph, PairStat,
};
use crate::par::Execution;
use crate::representative::{
    is_pronoun_mention, select_representative, BuiltinTagger, PosTagger, TagError,
};
use crate::resolver::{BuiltinResolver, ChunkResolver, LocalClustering, ResolveError};
use crate::rewriter::{self, apply_edits, plan_edits, Edit, RewriteResult};
use crate::segmenter::{chunk_document, split_sentences, Chunk, ChunkMode, SentenceSpan};
use crate::text::CharIndex;

/// Stage parameters. Backend selection lives with whoever builds the
/// [`Pipeline`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Token budget per chunk.
    pub max_chunk_tokens: usize,
    /// Edge threshold on the path distance (strict).
    pub threshold: f64,
    pub chunk_mode: ChunkMode,
    /// Worker bound for chunk resolution and path search; `0` uses every
    /// core and `1` runs sequentially.
    pub parallelism: usize,
    /// Skip path distances at or below the threshold. Clusters are identical
    /// either way; turn off to see every distance.
    pub prune_distances: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            max_chunk_tokens: 512,
            threshold: 0.9,
            chunk_mode: ChunkMode::Sliding,
            parallelism: 0,
            prune_distances: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.max_chunk_tokens < 1 {
            return Err(PipelineError::Config(
                "max_chunk_tokens must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(PipelineError::Config(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            )));
        }
        Ok(())
    }

    pub fn execution(&self) -> Execution {
        Execution::with_parallelism(self.parallelism)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("resolve: {0}")]
    Resolve(#[from] ResolveError),
    #[error("tag: {0}")]
    Tag(#[from] TagError),
    #[error("integrity: {0}")]
    Integrity(String),
}

impl PipelineError {
    /// Whether the failure came from talking to a remote backend.
    pub fn is_transport(&self) -> bool {
        matches!(
            self,
            PipelineError::Resolve(ResolveError::Transport { .. } | ResolveError::Status { .. })
                | PipelineError::Tag(TagError::Transport(_) | TagError::Status { .. })
        )
    }
}

/// Everything the pipeline derives from a document before rewriting. All
/// collections are in a stable order so the JSON dump diffs cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub config: PipelineConfig,
    pub sentences: Vec<SentenceSpan>,
    pub chunks: Vec<Chunk>,
    pub clusterings: Vec<LocalClustering>,
    pub mentions: Vec<GlobalMention>,
    /// Parallel to `mentions`.
    pub pronoun: Vec<bool>,
    pub pair_stats: Vec<PairStat>,
    pub distances: Vec<DistanceEntry>,
    pub graph: MentionGraph,
    pub clusters: Vec<GlobalCluster>,
}

impl Analysis {
    fn empty(config: PipelineConfig) -> Self {
        Self {
            config,
            sentences: Vec::new(),
            chunks: Vec::new(),
            clusterings: Vec::new(),
            mentions: Vec::new(),
            pronoun: Vec::new(),
            pair_stats: Vec::new(),
            distances: Vec::new(),
            graph: MentionGraph {
                node_count: 0,
                edges: Vec::new(),
            },
            clusters: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rewrite {
    pub analysis: Analysis,
    pub edits: Vec<Edit>,
    pub dropped_edits: Vec<Edit>,
    pub result: RewriteResult,
}

/// Segment, resolve, merge, pick representatives and rewrite.
pub struct Pipeline {
    config: PipelineConfig,
    resolver: Box<dyn ChunkResolver>,
    tagger: Box<dyn PosTagger>,
}

impl Pipeline {
    pub fn new(
        config: PipelineConfig,
        resolver: Box<dyn ChunkResolver>,
        tagger: Box<dyn PosTagger>,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Self {
            config,
            resolver,
            tagger,
        })
    }

    /// Builtin resolver and lexicon tagger.
    pub fn builtin(config: PipelineConfig) -> Result<Self, PipelineError> {
        Self::new(config, Box::new(BuiltinResolver), Box::new(BuiltinTagger))
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn analyze(&self, text: &str) -> Result<Analysis, PipelineError> {
        let config = self.config;
        let sentences = split_sentences(text);
        if sentences.is_empty() {
            return Ok(Analysis::empty(config));
        }
        let chunks = chunk_document(text, &sentences, config.max_chunk_tokens, config.chunk_mode)
            .map_err(|e| PipelineError::Config(e.to_string()))?;

        let idx = CharIndex::new(text);
        let resolve_exec = if self.resolver.serial() {
            Execution::Sequential
        } else {
            config.execution()
        };
        let clusterings = resolve_exec
            .map(&chunks, |chunk| {
                let chunk_text = chunk.text(text, &idx);
                let clustering = self.resolver.resolve(chunk.index, chunk_text)?;
                if clustering.chunk_index != chunk.index {
                    return Err(PipelineError::Integrity(format!(
                        "resolver answered chunk {} with a clustering for chunk {}",
                        chunk.index, clustering.chunk_index
                    )));
                }
                clustering
                    .check(chunk_text)
                    .map_err(|e| PipelineError::Integrity(format!("chunk {}: {e}", chunk.index)))?;
                Ok(clustering)
            })
            .into_iter()
            .collect::<Result<Vec<_>, PipelineError>>()?;

        let mentions = merge::unify_mentions(&clusterings, &chunks)
            .map_err(|e| PipelineError::Integrity(e.to_string()))?;
        let stats =
            merge::accumulate_pair_stats_with(&clusterings, &chunks, &mentions, config.execution())
                .map_err(|e| PipelineError::Integrity(e.to_string()))?;
        let direct = merge::direct_distances(&stats);
        let floor = if config.prune_distances {
            config.threshold
        } else {
            0.0
        };
        let distances = merge::all_pairs_max_product_with(
            &direct,
            &MaxProductOptions {
                floor,
                execution: config.execution(),
            },
        );
        let graph = build_graph(mentions.len(), &distances, config.threshold);
        let mut clusters = components(&graph);

        let tags = self.tagger.tag(text)?;
        let pronoun: Vec<bool> = mentions
            .iter()
            .map(|m| is_pronoun_mention(m.start, m.end, &tags))
            .collect();
        for cluster in &mut clusters {
            cluster.representative = select_representative(cluster, &mentions, &pronoun);
        }

        Ok(Analysis {
            config,
            sentences,
            chunks,
            clusterings,
            mentions,
            pronoun,
            pair_stats: stats.into_values().collect(),
            distances: distances.into_values().collect(),
            graph,
            clusters,
        })
    }

    pub fn rewrite(&self, text: &str) -> Result<Rewrite, PipelineError> {
        let analysis = self.analyze(text)?;
        let starts = rewriter::sentence_initial_positions(text, &analysis.sentences);
        let plan = plan_edits(&analysis.clusters, &analysis.mentions, &starts);
        let mut result =
            apply_edits(text, &plan.edits).map_err(|e| PipelineError::Integrity(e.to_string()))?;
        result.dropped = plan.dropped.len();
        Ok(Rewrite {
            analysis,
            edits: plan.edits,
            dropped_edits: plan.dropped,
            result,
        })
    }
}
