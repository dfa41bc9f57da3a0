//! Three-stage instances: configuration, per-query execution and run reports.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::StageError;
use crate::extraction::{extract_subgraph, SeConfig, SeMethod};
use crate::filtering::{filter_paths, PfConfig, PfMethod};
use crate::generation::{sha256_hex, GenerationInput};
use crate::kg::{Direction, EntityId, Graph, Query, RelationId};
use crate::metrics::{aggregate, evaluate_paths, evaluate_subgraph, QueryMetrics, StageMetrics};
use crate::path::PathSet;
use crate::presets;
use crate::refinement::{query_seed, refine_paths, PrMethod, RefineConfig};
use crate::scoring::{build_scorer, render_path, Scorer, ScorerConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("unknown preset {0} (valid ids are 0-20)")]
    UnknownPreset(u32),
    #[error(transparent)]
    Invalid(#[from] StageError),
}

/// A complete retrieval instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub id: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub se: SeConfig,
    pub pf: PfConfig,
    pub pr: RefineConfig,
}

impl InstanceConfig {
    pub fn validate(&self) -> Result<(), StageError> {
        self.se.validate()?;
        self.pf.validate()?;
        self.pr.validate()
    }

    pub fn from_yaml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_yaml::from_str(text).map_err(|e| ConfigError::Parse {
            path: "<yaml>".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("config serializes")
    }

    /// Stage names, e.g. `ppr/spf/random`.
    pub fn methods(&self) -> (SeMethod, PfMethod, PrMethod) {
        (self.se.method, self.pf.method, self.pr.method)
    }
}

/// Where an instance comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSource<'a> {
    Preset(u32),
    File(&'a Path),
}

pub fn load_instance_config(source: InstanceSource<'_>) -> Result<InstanceConfig, ConfigError> {
    let cfg = match source {
        InstanceSource::Preset(id) => presets::preset(id).ok_or(ConfigError::UnknownPreset(id))?,
        InstanceSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.display().to_string(),
                source,
            })?;
            serde_yaml::from_str(&text).map_err(|e| ConfigError::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            })?
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTiming {
    pub se_seconds: f64,
    pub pf_seconds: f64,
    pub pr_seconds: f64,
    pub total_seconds: f64,
}

impl StageTiming {
    fn new(se: f64, pf: f64, pr: f64) -> Self {
        Self {
            se_seconds: se,
            pf_seconds: pf,
            pr_seconds: pr,
            total_seconds: se + pf + pr,
        }
    }

    pub fn mean<'a>(items: impl IntoIterator<Item = &'a StageTiming>) -> Self {
        let (mut se, mut pf, mut pr, mut n) = (0.0, 0.0, 0.0, 0usize);
        for t in items {
            se += t.se_seconds;
            pf += t.pf_seconds;
            pr += t.pr_seconds;
            n += 1;
        }
        if n == 0 {
            return Self::default();
        }
        let n = n as f64;
        Self::new(se / n, pf / n, pr / n)
    }
}

/// A path in both readable and id form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRecord {
    pub text: String,
    pub entities: Vec<EntityId>,
    pub relations: Vec<RelationId>,
    pub directions: Vec<Direction>,
}

impl PathRecord {
    fn new(p: &crate::path::ReasoningPath, graph: &Graph) -> Self {
        Self {
            text: render_path(p, graph),
            entities: p.entities().to_vec(),
            relations: p.hops().iter().map(|h| h.relation).collect(),
            directions: p.hops().iter().map(|h| h.direction).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageQueryMetrics {
    pub subgraph: QueryMetrics,
    pub paths: QueryMetrics,
    pub refined: QueryMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub query_id: String,
    pub question: String,
    pub answers: Vec<String>,
    pub subgraph_entities: usize,
    pub subgraph_triples: usize,
    pub filtered_paths: usize,
    pub refined_paths: usize,
    /// Digest of the filtered path set, to compare runs that differ only downstream.
    pub filtered_sha256: String,
    pub final_paths: Vec<PathRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<StageQueryMetrics>,
    pub timing: StageTiming,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl QueryResult {
    pub fn generation_input(&self) -> GenerationInput {
        GenerationInput {
            query_id: self.query_id.clone(),
            question: self.question.clone(),
            answers: self.answers.clone(),
            paths: self.final_paths.iter().map(|p| p.text.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMetrics {
    pub subgraph: StageMetrics,
    pub paths: StageMetrics,
    pub refined: StageMetrics,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScorerFailures {
    pub se: u64,
    pub pf: u64,
    pub pr: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance_id: u32,
    pub instance_name: String,
    pub seed: u64,
    pub config: InstanceConfig,
    pub query_count: usize,
    pub failed_queries: usize,
    pub metrics: RunMetrics,
    /// Mean seconds per query and stage.
    pub timing: StageTiming,
    pub scorer_failures: ScorerFailures,
    pub queries: Vec<QueryResult>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// The report with every wall-clock field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.timing = StageTiming::default();
        for q in &mut r.queries {
            q.timing = StageTiming::default();
        }
        r
    }

    /// Recomputes the aggregate metrics from the per-query rows.
    pub fn recompute_metrics(queries: &[QueryResult]) -> RunMetrics {
        let rows: Vec<&StageQueryMetrics> = queries.iter().filter_map(|q| q.metrics.as_ref()).collect();
        RunMetrics {
            subgraph: aggregate(rows.iter().map(|m| &m.subgraph)),
            paths: aggregate(rows.iter().map(|m| &m.paths)),
            refined: aggregate(rows.iter().map(|m| &m.refined)),
        }
    }

    /// One JSON object per query: `query_id` and its final paths.
    pub fn write_paths_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for q in &self.queries {
            let line = serde_json::json!({ "query_id": q.query_id, "paths": q.final_paths });
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

struct Scorers {
    se: Option<Arc<dyn Scorer>>,
    pf: Option<Arc<dyn Scorer>>,
    pr: Option<Arc<dyn Scorer>>,
}

impl Scorers {
    fn build(cfg: &InstanceConfig) -> Result<Self, StageError> {
        let make = |c: &Option<ScorerConfig>| c.as_ref().map(|c| build_scorer(c, cfg.seed)).transpose();
        Ok(Self {
            se: make(&cfg.se.scorer)?,
            pf: make(&cfg.pf.scorer)?,
            pr: make(&cfg.pr.scorer)?,
        })
    }

    fn failures(&self) -> ScorerFailures {
        let f = |s: &Option<Arc<dyn Scorer>>| s.as_ref().map_or(0, |s| s.failures());
        ScorerFailures {
            se: f(&self.se),
            pf: f(&self.pf),
            pr: f(&self.pr),
        }
    }
}

fn path_set_digest(paths: &PathSet) -> String {
    let mut text = String::new();
    for p in paths {
        for e in p.entities() {
            text.push_str(&e.0.to_string());
            text.push(',');
        }
        for h in p.hops() {
            text.push_str(&h.relation.0.to_string());
            text.push(if h.direction == Direction::Forward { '+' } else { '-' });
        }
        text.push('\n');
    }
    sha256_hex(&text)
}

fn query_metrics(metrics: crate::metrics::SetMetrics, hit: bool, query: &Query) -> QueryMetrics {
    QueryMetrics {
        set: metrics,
        hit,
        has_truth: query.has_answers(),
    }
}

fn run_query(graph: &Graph, query: &Query, cfg: &InstanceConfig, scorers: &Scorers) -> QueryResult {
    let mut result = QueryResult {
        query_id: query.id.clone(),
        question: query.text.clone(),
        answers: query.answers.iter().map(|&a| graph.entity_label(a).to_owned()).collect(),
        subgraph_entities: 0,
        subgraph_triples: 0,
        filtered_paths: 0,
        refined_paths: 0,
        filtered_sha256: String::new(),
        final_paths: Vec::new(),
        metrics: None,
        timing: StageTiming::default(),
        warnings: Vec::new(),
        error: None,
    };
    let (mut se_t, mut pf_t, mut pr_t) = (0.0, 0.0, 0.0);
    let outcome = (|| -> Result<(), StageError> {
        let started = Instant::now();
        let subgraph = extract_subgraph(
            graph,
            query,
            &cfg.se,
            scorers.se.as_deref(),
            query_seed(cfg.seed, &query.id),
        )?;
        se_t = started.elapsed().as_secs_f64();
        result.subgraph_entities = subgraph.entity_count();
        result.subgraph_triples = subgraph.triple_count();

        let started = Instant::now();
        let (filtered, warnings) = filter_paths(&subgraph, query, &cfg.pf, scorers.pf.as_deref())?;
        pf_t = started.elapsed().as_secs_f64();
        result.warnings.extend(warnings);
        result.filtered_paths = filtered.len();
        result.filtered_sha256 = path_set_digest(&filtered);

        let started = Instant::now();
        let refined = refine_paths(
            &filtered,
            query,
            &subgraph,
            &cfg.pr,
            scorers.pr.as_deref(),
            query_seed(cfg.seed.wrapping_add(1), &query.id),
        )?;
        pr_t = started.elapsed().as_secs_f64();
        result.refined_paths = refined.len();
        result.final_paths = refined.iter().map(|p| PathRecord::new(p, &subgraph)).collect();

        let sub_m = evaluate_subgraph(&subgraph, query);
        let sub_hit = subgraph.entities().iter().any(|e| query.answers.contains(e));
        let (paths_m, paths_hit) = evaluate_paths(&filtered, query);
        let (ref_m, ref_hit) = evaluate_paths(&refined, query);
        result.metrics = Some(StageQueryMetrics {
            subgraph: query_metrics(sub_m, sub_hit, query),
            paths: query_metrics(paths_m, paths_hit, query),
            refined: query_metrics(ref_m, ref_hit, query),
        });
        Ok(())
    })();
    if let Err(e) = outcome {
        log::warn!("query {} failed: {e}", query.id);
        result.error = Some(e.to_string());
    }
    result.timing = StageTiming::new(se_t, pf_t, pr_t);
    result
}

/// Runs every query through the instance. Individual query failures are
/// recorded in the report; only configuration problems abort the run.
pub fn run_instance(
    graph: &Graph,
    queries: &[Query],
    cfg: &InstanceConfig,
    opts: RunOptions,
) -> Result<RunReport, ConfigError> {
    cfg.validate()?;
    let scorers = Scorers::build(cfg).map_err(ConfigError::Invalid)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| StageError::Config(format!("worker pool: {e}")))?;
    let mut results: Vec<QueryResult> = pool.install(|| {
        queries
            .par_iter()
            .map(|q| run_query(graph, q, cfg, &scorers))
            .collect()
    });
    results.sort_by(|a, b| a.query_id.cmp(&b.query_id));

    Ok(RunReport {
        instance_id: cfg.id,
        instance_name: cfg.name.clone(),
        seed: cfg.seed,
        config: cfg.clone(),
        query_count: results.len(),
        failed_queries: results.iter().filter(|r| r.error.is_some()).count(),
        metrics: RunReport::recompute_metrics(&results),
        timing: StageTiming::mean(results.iter().map(|r| &r.timing)),
        scorer_failures: scorers.failures(),
        queries: results,
    })
}
