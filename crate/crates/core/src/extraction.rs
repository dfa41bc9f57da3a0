//! Subgraph extraction: personalized PageRank, Monte-Carlo random walk with
//! restart, and PPR followed by relation-level semantic pruning.
//!
//! Both walk-based rankers traverse the symmetrized graph (every stored edge
//! usable in both directions, degree = in + out). Mass that reaches an
//! isolated node teleports back to the seeds.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::StageError;
use crate::kg::{EntityId, Graph, Query};
use crate::scoring::{top_k_indices, Candidate, QueryContext, Scorer, ScorerConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PprParams {
    /// Probability mass returned to the preference vector each step.
    pub restart_prob: f64,
    pub max_ent: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PprParams {
    fn default() -> Self {
        Self {
            restart_prob: 0.8,
            max_ent: 2000,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwrParams {
    pub path_num: usize,
    pub restart_prob: f64,
    pub max_walk_len: usize,
    pub max_ent: usize,
    pub seed: u64,
}

impl Default for RwrParams {
    fn default() -> Self {
        Self {
            path_num: 64,
            restart_prob: 0.8,
            max_walk_len: 10,
            max_ent: 2000,
            seed: 0,
        }
    }
}

/// Non-negative entity scores, sorted by entity id. Only entities with a
/// positive score are stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoredEntities(Vec<(EntityId, f64)>);

impl ScoredEntities {
    pub fn from_pairs(mut pairs: Vec<(EntityId, f64)>) -> Self {
        pairs.sort_by_key(|&(e, _)| e);
        pairs.dedup_by_key(|&mut (e, _)| e);
        Self(pairs)
    }

    pub fn get(&self, e: EntityId) -> f64 {
        self.0
            .binary_search_by_key(&e, |&(id, _)| id)
            .map_or(0.0, |i| self.0[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (EntityId, f64)> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().map(|&(_, s)| s).sum()
    }
}

fn seed_locals(graph: &Graph, seeds: &BTreeSet<EntityId>) -> Result<Vec<usize>, StageError> {
    if seeds.is_empty() {
        return Err(StageError::EmptySeeds);
    }
    seeds
        .iter()
        .map(|&s| graph.local_index(s).ok_or(StageError::UnknownSeed(s)))
        .collect()
}

fn to_scored(graph: &Graph, dense: &[f64]) -> ScoredEntities {
    // entities() is sorted, so the pairs come out in id order
    ScoredEntities(
        graph
            .entities()
            .iter()
            .zip(dense)
            .filter(|&(_, &s)| s > 0.0)
            .map(|(&e, &s)| (e, s))
            .collect(),
    )
}

/// Power iteration of `p = λE + (1-λ) Σ_{u ∈ N(v)} p_u / deg(u)`.
pub fn ppr_scores(graph: &Graph, seeds: &BTreeSet<EntityId>, params: &PprParams) -> Result<ScoredEntities, StageError> {
    let locals = seed_locals(graph, seeds)?;
    let adj = graph.sym_adjacency();
    let n = adj.node_count();
    let lambda = params.restart_prob;
    let pref = 1.0 / locals.len() as f64;

    let mut p = vec![0.0; n];
    for &s in &locals {
        p[s] = pref;
    }
    let mut next = vec![0.0; n];
    for _ in 0..params.max_iter {
        next.iter_mut().for_each(|x| *x = 0.0);
        let mut dangling = 0.0;
        for (u, &mass) in p.iter().enumerate() {
            let deg = adj.degree(u);
            if deg == 0 {
                dangling += mass;
                continue;
            }
            let share = (1.0 - lambda) * mass / deg as f64;
            for &v in adj.neighbors(u) {
                next[v as usize] += share;
            }
        }
        let restart = (lambda + (1.0 - lambda) * dangling) * pref;
        for &s in &locals {
            next[s] += restart;
        }
        let delta: f64 = p.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut p, &mut next);
        if delta < params.tol {
            break;
        }
    }
    Ok(to_scored(graph, &p))
}

/// Visit frequencies of `path_num` restart-terminated walks from each seed.
pub fn rwr_scores(graph: &Graph, seeds: &BTreeSet<EntityId>, params: &RwrParams) -> Result<ScoredEntities, StageError> {
    let locals = seed_locals(graph, seeds)?;
    let adj = graph.sym_adjacency();
    let mut visits = vec![0u64; adj.node_count()];
    for (&seed, &start) in seeds.iter().zip(&locals) {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ u64::from(seed.0).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        for _ in 0..params.path_num {
            let mut pos = start;
            visits[pos] += 1;
            for _ in 0..params.max_walk_len {
                if rng.random::<f64>() < params.restart_prob {
                    break;
                }
                let nbrs = adj.neighbors(pos);
                if nbrs.is_empty() {
                    break;
                }
                pos = nbrs[rng.random_range(0..nbrs.len())] as usize;
                visits[pos] += 1;
            }
        }
    }
    let total: u64 = visits.iter().sum();
    let dense: Vec<f64> = visits.iter().map(|&v| v as f64 / total as f64).collect();
    Ok(to_scored(graph, &dense))
}

/// The `max_ent` best entities; seeds are always kept and ties go to the
/// smaller id.
pub fn top_entities(scores: &ScoredEntities, max_ent: usize, seeds: &BTreeSet<EntityId>) -> BTreeSet<EntityId> {
    let mut rest: Vec<(EntityId, f64)> = scores.iter().filter(|(e, _)| !seeds.contains(e)).collect();
    rest.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite scores").then(a.0.cmp(&b.0)));
    let budget = max_ent.saturating_sub(seeds.len());
    seeds
        .iter()
        .copied()
        .chain(rest.into_iter().take(budget).map(|(e, _)| e))
        .collect()
}

/// Keeps triples whose relation label is among the `window` best-scoring
/// relations of the subgraph. Topic entities survive unconditionally; any
/// other entity left without a retained triple is dropped.
pub fn semantic_refine(
    subgraph: &Graph,
    query: &Query,
    window: usize,
    scorer: &dyn Scorer,
) -> Result<Graph, StageError> {
    let relations = subgraph.relations();
    if window >= relations.len() {
        return Ok(subgraph.clone());
    }
    let candidates: Vec<Candidate> = relations.iter().map(|&r| Candidate::relation(subgraph, r)).collect();
    let ctx = QueryContext::for_query(query, subgraph);
    let scores = scorer.score_batch(&ctx, &candidates)?;
    let kept: BTreeSet<_> = top_k_indices(scores.as_slice(), window, |i| (candidates[i].text.as_str(), relations[i]))
        .into_iter()
        .map(|i| relations[i])
        .collect();
    let triples = subgraph
        .triples()
        .iter()
        .filter(|t| kept.contains(&t.relation))
        .copied()
        .collect();
    let topic = query.topic_entities.iter().copied().filter(|&e| subgraph.contains_entity(e));
    Ok(subgraph.restrict(topic, triples))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeMethod {
    Ppr,
    Rwr,
    PprScored,
}

fn default_restart_prob() -> f64 {
    0.8
}
fn default_max_ent() -> usize {
    2000
}
fn default_path_num() -> usize {
    64
}
fn default_max_walk_len() -> usize {
    10
}
fn default_window() -> usize {
    24
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    100
}

/// Subgraph-extraction stage configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeConfig {
    pub method: SeMethod,
    #[serde(default = "default_restart_prob")]
    pub restart_prob: f64,
    #[serde(default = "default_max_ent")]
    pub max_ent: usize,
    #[serde(default = "default_path_num")]
    pub path_num: usize,
    #[serde(default = "default_max_walk_len")]
    pub max_walk_len: usize,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scorer: Option<ScorerConfig>,
}

impl SeConfig {
    pub fn new(method: SeMethod) -> Self {
        Self {
            method,
            restart_prob: default_restart_prob(),
            max_ent: default_max_ent(),
            path_num: default_path_num(),
            max_walk_len: default_max_walk_len(),
            window: default_window(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            scorer: None,
        }
    }

    pub fn ppr_params(&self) -> PprParams {
        PprParams {
            restart_prob: self.restart_prob,
            max_ent: self.max_ent,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    pub fn rwr_params(&self, seed: u64) -> RwrParams {
        RwrParams {
            path_num: self.path_num,
            restart_prob: self.restart_prob,
            max_walk_len: self.max_walk_len,
            max_ent: self.max_ent,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), StageError> {
        let fail = |m: &str| Err(StageError::Config(format!("se: {m}")));
        if !(self.restart_prob > 0.0 && self.restart_prob < 1.0) {
            return fail("restart_prob must lie in (0, 1)");
        }
        if self.max_ent == 0 || self.path_num == 0 || self.max_walk_len == 0 || self.max_iter == 0 {
            return fail("max_ent, path_num, max_walk_len and max_iter must be positive");
        }
        if self.window == 0 {
            return fail("window must be positive");
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return fail("tol must be positive");
        }
        match (&self.method, &self.scorer) {
            (SeMethod::PprScored, None) => fail("ppr_scored requires a scorer"),
            (SeMethod::PprScored, Some(s)) => s.validate().map_err(|e| StageError::Config(format!("se.scorer: {e}"))),
            (_, Some(_)) => fail("scorer is only used by ppr_scored"),
            _ => Ok(()),
        }
    }
}

/// Dispatches the configured extraction method for one query.
pub fn extract_subgraph(
    graph: &Graph,
    query: &Query,
    cfg: &SeConfig,
    scorer: Option<&dyn Scorer>,
    seed: u64,
) -> Result<Graph, StageError> {
    let seeds: BTreeSet<EntityId> = query
        .topic_entities
        .iter()
        .copied()
        .filter(|&e| graph.contains_entity(e))
        .collect();
    let scores = match cfg.method {
        SeMethod::Ppr | SeMethod::PprScored => ppr_scores(graph, &seeds, &cfg.ppr_params())?,
        SeMethod::Rwr => rwr_scores(graph, &seeds, &cfg.rwr_params(seed))?,
    };
    let keep = top_entities(&scores, cfg.max_ent, &seeds);
    let sub = graph.induced_subgraph(&keep);
    match cfg.method {
        SeMethod::PprScored => {
            let scorer = scorer.ok_or_else(|| StageError::Config("ppr_scored requires a scorer".into()))?;
            semantic_refine(&sub, query, cfg.window, scorer)
        }
        _ => Ok(sub),
    }
}
