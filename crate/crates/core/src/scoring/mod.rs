//! Relevance scoring over rendered text candidates.
//!
//! Every retrieval stage that ranks something (relation labels during
//! subgraph refinement, partial paths during beam search, whole paths during
//! refinement) goes through the [`Scorer`] trait. Native scorers (BM25,
//! seeded random) are pure functions of their inputs; remote scorers talk to
//! embedding, rerank and chat-completion endpoints, or run in `stub` mode
//! with deterministic hash-based scores when no model server is available.

mod bm25;
mod hashed;
pub mod remote;

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{Direction, EntityId, Graph, RelationId, Triple};
use crate::path::ReasoningPath;

pub use bm25::{bm25_score, Bm25Params, Bm25Scorer, CorpusStats};
pub use hashed::{unit_hash, RandomScorer, StubScorer};
pub use remote::{EmbeddingScorer, LlmScorer, RerankScorer};

/// Literal endpoint value selecting offline stub mode for remote kinds.
pub const STUB_ENDPOINT: &str = "stub";

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("scorer transport failure for candidates {range:?}: {message}")]
    Transport { range: Range<usize>, message: String },
    #[error("scorer protocol error: {0}")]
    Protocol(String),
    #[error("invalid scorer config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CandidateKind {
    Entity,
    Relation,
    Triple,
    Path,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Entity(EntityId),
    Relation(RelationId),
    Triple(Triple),
    Path(ReasoningPath),
}

/// A scoreable object with its rendered text.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub text: String,
    pub payload: Payload,
}

impl Candidate {
    pub fn kind(&self) -> CandidateKind {
        match self.payload {
            Payload::Entity(_) => CandidateKind::Entity,
            Payload::Relation(_) => CandidateKind::Relation,
            Payload::Triple(_) => CandidateKind::Triple,
            Payload::Path(_) => CandidateKind::Path,
        }
    }

    pub fn entity(graph: &Graph, e: EntityId) -> Self {
        Self {
            text: graph.entity_label(e).to_owned(),
            payload: Payload::Entity(e),
        }
    }

    pub fn relation(graph: &Graph, r: RelationId) -> Self {
        Self {
            text: graph.relation_label(r).to_owned(),
            payload: Payload::Relation(r),
        }
    }

    pub fn triple(graph: &Graph, t: Triple) -> Self {
        Self {
            text: render_triple(&t, graph),
            payload: Payload::Triple(t),
        }
    }

    pub fn path(graph: &Graph, p: ReasoningPath) -> Self {
        Self {
            text: render_path(&p, graph),
            payload: Payload::Path(p),
        }
    }
}

/// What the candidates are scored against.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryContext {
    pub text: String,
    pub topic_labels: Vec<String>,
}

impl QueryContext {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            topic_labels: Vec::new(),
        }
    }

    pub fn for_query(query: &crate::kg::Query, graph: &Graph) -> Self {
        Self {
            text: query.text.clone(),
            topic_labels: query
                .topic_entities
                .iter()
                .map(|&e| graph.entity_label(e).to_owned())
                .collect(),
        }
    }
}

/// Finite scores aligned with a candidate list; higher is more relevant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(scores: Vec<f64>, expected: usize) -> Result<Self, ScoreError> {
        if scores.len() != expected {
            return Err(ScoreError::Protocol(format!(
                "expected {expected} scores, got {}",
                scores.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(ScoreError::Protocol(format!("non-finite score at index {i}")));
        }
        Ok(Self(scores))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub trait Scorer: Send + Sync {
    fn score_batch(&self, query: &QueryContext, candidates: &[Candidate]) -> Result<ScoreVector, ScoreError>;

    /// Soft failures absorbed so far (e.g. unparseable LLM score lists).
    fn failures(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Bm25,
    Random,
    Embedding,
    Rerank,
    Llm,
}

impl ScorerKind {
    pub fn is_remote(self) -> bool {
        matches!(self, Self::Embedding | Self::Rerank | Self::Llm)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bm25 => "bm25",
            Self::Random => "random",
            Self::Embedding => "embedding",
            Self::Rerank => "rerank",
            Self::Llm => "llm",
        }
    }
}

impl fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_batch_size() -> usize {
    32
}

fn default_k1() -> f64 {
    1.2
}

fn default_b() -> f64 {
    0.75
}

fn default_max_in_flight() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerConfig {
    pub kind: ScorerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_k1")]
    pub k1: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
}

impl ScorerConfig {
    pub fn new(kind: ScorerKind) -> Self {
        Self {
            kind,
            endpoint: None,
            model: None,
            batch_size: default_batch_size(),
            seed: None,
            k1: default_k1(),
            b: default_b(),
            max_in_flight: default_max_in_flight(),
        }
    }

    pub fn bm25() -> Self {
        Self::new(ScorerKind::Bm25)
    }

    pub fn remote(kind: ScorerKind, endpoint: &str, model: &str) -> Self {
        Self {
            endpoint: Some(endpoint.to_owned()),
            model: Some(model.to_owned()),
            ..Self::new(kind)
        }
    }

    pub fn is_stub(&self) -> bool {
        self.endpoint.as_deref() == Some(STUB_ENDPOINT)
    }

    pub fn validate(&self) -> Result<(), ScoreError> {
        if self.batch_size == 0 {
            return Err(ScoreError::Config("batch_size must be positive".into()));
        }
        if self.max_in_flight == 0 {
            return Err(ScoreError::Config("max_in_flight must be positive".into()));
        }
        if self.kind.is_remote() && self.endpoint.as_deref().is_none_or(str::is_empty) {
            return Err(ScoreError::Config(format!("{} scorer requires an endpoint", self.kind)));
        }
        if self.kind == ScorerKind::Bm25 {
            if !(self.k1 > 0.0 && self.k1.is_finite()) {
                return Err(ScoreError::Config(format!("bm25 k1 must be > 0, got {}", self.k1)));
            }
            if !(0.0..=1.0).contains(&self.b) {
                return Err(ScoreError::Config(format!("bm25 b must lie in [0, 1], got {}", self.b)));
            }
        }
        Ok(())
    }
}

/// Instantiates the scorer described by `config`. `default_seed` seeds the
/// random scorer when the config carries none.
pub fn build_scorer(config: &ScorerConfig, default_seed: u64) -> Result<Arc<dyn Scorer>, ScoreError> {
    config.validate()?;
    let seed = config.seed.unwrap_or(default_seed);
    Ok(match config.kind {
        ScorerKind::Bm25 => Arc::new(Bm25Scorer::new(Bm25Params {
            k1: config.k1,
            b: config.b,
        })),
        ScorerKind::Random => Arc::new(RandomScorer::new(seed)),
        kind if config.is_stub() => Arc::new(StubScorer::new(kind, config.model.clone().unwrap_or_default())),
        ScorerKind::Embedding => Arc::new(EmbeddingScorer::from_config(config)?),
        ScorerKind::Rerank => Arc::new(RerankScorer::from_config(config)?),
        ScorerKind::Llm => Arc::new(LlmScorer::from_config(config)?),
    })
}

/// `<source>, <relation>, <target>`, labels verbatim.
pub fn render_triple(t: &Triple, graph: &Graph) -> String {
    format!(
        "{}, {}, {}",
        graph.entity_label(t.source),
        graph.relation_label(t.relation),
        graph.entity_label(t.target)
    )
}

/// `e0 -> r1 -> e1 -> ...`; backward hops carry an `(inv)` suffix.
pub fn render_path(p: &ReasoningPath, graph: &Graph) -> String {
    let mut out = String::from(graph.entity_label(p.source()));
    for (hop, &next) in p.hops().iter().zip(&p.entities()[1..]) {
        out.push_str(" -> ");
        out.push_str(graph.relation_label(hop.relation));
        if hop.direction == Direction::Backward {
            out.push_str("(inv)");
        }
        out.push_str(" -> ");
        out.push_str(graph.entity_label(next));
    }
    out
}

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Cosine similarity; a zero vector yields 0 with a warning.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "cosine of vectors with different dimensions");
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        log::warn!("degenerate zero embedding; similarity defined as 0");
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Indices of the `k` best candidates: score descending, ties by `tie` ascending.
pub fn top_k_indices<K: Ord>(scores: &[f64], k: usize, tie: impl Fn(usize) -> K) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| {
        scores[j]
            .partial_cmp(&scores[i])
            .expect("scores are finite")
            .then_with(|| tie(i).cmp(&tie(j)))
    });
    order.truncate(k);
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{turing_toy_graph, Traversal};

    #[test]
    fn render_triple_verbatim() {
        let g = turing_toy_graph();
        let t = g.triples().iter().find(|t| g.relation_label(t.relation) == "was developed").unwrap();
        assert_eq!(render_triple(t, &g), "Relational Model, was developed, Edgar F. Codd");
        let loops = Graph::from_labeled([("a", "r", "a"), ("x, y", "r", "a")]);
        assert_eq!(render_triple(&loops.triples()[0], &loops), "a, r, a");
        let comma = loops.triples().iter().find(|t| t.source != t.target).unwrap();
        assert_eq!(render_triple(comma, &loops), "x, y, r, a");
    }

    #[test]
    fn render_paths() {
        let g = turing_toy_graph();
        let id = |l: &str| g.entity_id(l).unwrap();
        let mut p = ReasoningPath::start(id("Relational Model"));
        for next in ["Edgar F. Codd", "ACM Turing Award"] {
            let e = g
                .out_edges(p.target(), Traversal::Both)
                .unwrap()
                .into_iter()
                .find(|e| e.neighbor == id(next))
                .unwrap();
            p = p.extended(e).unwrap();
        }
        assert_eq!(
            render_path(&p, &g),
            "Relational Model -> was developed -> Edgar F. Codd -> awarded -> ACM Turing Award"
        );
        assert_eq!(render_path(&ReasoningPath::start(id("Edgar F. Codd")), &g), "Edgar F. Codd");
        let inv = ReasoningPath::start(id("Michael Stonebraker"))
            .extended(g.out_edges(id("Michael Stonebraker"), Traversal::Backward).unwrap()[0])
            .unwrap();
        assert_eq!(render_path(&inv, &g), "Michael Stonebraker -> was created(inv) -> PostgreSQL");
    }

    #[test]
    fn tokenizer_splits_packed_labels() {
        assert_eq!(tokenize("people.person.nationality"), ["people", "person", "nationality"]);
        assert_eq!(tokenize("Edgar F. Codd"), ["edgar", "f", "codd"]);
        assert!(tokenize("  ,. ").is_empty());
    }

    #[test]
    fn cosine_cases() {
        assert!((cosine_similarity(&[0.3, -1.0, 2.0], &[0.3, -1.0, 2.0]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert!((cosine_similarity(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]) - 8.0 / 9.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(ScorerConfig::bm25().validate().is_ok());
        assert!(ScorerConfig::new(ScorerKind::Embedding).validate().is_err());
        assert!(ScorerConfig::remote(ScorerKind::Rerank, "stub", "m").validate().is_ok());
        let bad_k1 = ScorerConfig { k1: 0.0, ..ScorerConfig::bm25() };
        assert!(bad_k1.validate().is_err());
        let bad_b = ScorerConfig { b: 1.5, ..ScorerConfig::bm25() };
        assert!(bad_b.validate().is_err());
        let bad_batch = ScorerConfig { batch_size: 0, ..ScorerConfig::bm25() };
        assert!(bad_batch.validate().is_err());
    }

    #[test]
    fn score_vector_rejects_bad_values() {
        assert!(ScoreVector::new(vec![1.0, f64::NAN], 2).is_err());
        assert!(ScoreVector::new(vec![1.0], 2).is_err());
        assert!(ScoreVector::new(vec![f64::INFINITY], 1).is_err());
    }

    #[test]
    fn top_k_tie_break() {
        let scores = [0.5, 0.9, 0.5, 0.1];
        assert_eq!(top_k_indices(&scores, 3, |i| i), vec![1, 0, 2]);
        assert_eq!(top_k_indices(&scores, 3, std::cmp::Reverse), vec![1, 2, 0]);
    }
}
