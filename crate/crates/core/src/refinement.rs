//! Path refinement: cut a filtered path set down to a fixed budget.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::StageError;
use crate::kg::{Graph, Query};
use crate::path::PathSet;
use crate::scoring::{top_k_indices, Candidate, QueryContext, Scorer, ScorerConfig};

/// Derives a per-query seed so that queries in one run draw independently.
pub fn query_seed(seed: u64, query_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(query_id.as_bytes());
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}

/// Uniform sample of `top_k` paths without replacement, in sampled order.
/// Sets no larger than the budget come back unchanged.
pub fn refine_random(paths: &PathSet, top_k: usize, seed: u64) -> PathSet {
    if paths.len() <= top_k {
        return paths.clone();
    }
    let mut pool = paths.paths().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (chosen, _) = pool.partial_shuffle(&mut rng, top_k);
    PathSet::ordered(chosen.to_vec(), paths.truncated)
}

/// Scores every rendered path against the question and keeps the best
/// `top_k`, highest first. Ties go to the canonically smaller path.
pub fn refine_scored(
    paths: &PathSet,
    query: &Query,
    graph: &Graph,
    scorer: &dyn Scorer,
    top_k: usize,
) -> Result<PathSet, StageError> {
    if paths.is_empty() {
        return Ok(paths.clone());
    }
    let candidates: Vec<Candidate> = paths.iter().map(|p| Candidate::path(graph, p.clone())).collect();
    let scores = scorer.score_batch(&QueryContext::for_query(query, graph), &candidates)?;
    let all = paths.paths();
    let kept = top_k_indices(scores.as_slice(), top_k, |i| &all[i])
        .into_iter()
        .map(|i| all[i].clone())
        .collect();
    Ok(PathSet::ordered(kept, paths.truncated))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrMethod {
    Random,
    Scored,
}

fn default_top_k() -> usize {
    64
}

/// Path-refinement stage configuration. The sampling seed comes from the
/// instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineConfig {
    pub method: PrMethod,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scorer: Option<ScorerConfig>,
}

impl RefineConfig {
    pub fn new(method: PrMethod) -> Self {
        Self {
            method,
            top_k: default_top_k(),
            scorer: None,
        }
    }

    pub fn validate(&self) -> Result<(), StageError> {
        let fail = |m: &str| Err(StageError::Config(format!("pr: {m}")));
        if self.top_k == 0 {
            return fail("top_k must be positive");
        }
        match (&self.method, &self.scorer) {
            (PrMethod::Scored, None) => fail("scored requires a scorer"),
            (PrMethod::Scored, Some(s)) => s.validate().map_err(|e| StageError::Config(format!("pr.scorer: {e}"))),
            (_, Some(_)) => fail("scorer is only used by scored"),
            _ => Ok(()),
        }
    }
}

/// Runs the configured refinement for one query.
pub fn refine_paths(
    paths: &PathSet,
    query: &Query,
    graph: &Graph,
    cfg: &RefineConfig,
    scorer: Option<&dyn Scorer>,
    seed: u64,
) -> Result<PathSet, StageError> {
    match cfg.method {
        PrMethod::Random => Ok(refine_random(paths, cfg.top_k, seed)),
        PrMethod::Scored => {
            let scorer = scorer.ok_or_else(|| StageError::Config("scored requires a scorer".into()))?;
            refine_scored(paths, query, graph, scorer, cfg.top_k)
        }
    }
}
