use sha2::{Digest, Sha256};

use super::{Candidate, QueryContext, ScoreError, ScoreVector, Scorer, ScorerKind};

/// Maps the byte parts to a uniform value in `[0, 1)`. Stable across runs,
/// platforms and releases.
pub fn unit_hash(parts: &[&[u8]]) -> f64 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    (u64::from_le_bytes(word) >> 11) as f64 / (1u64 << 53) as f64
}

/// Seeded pseudo-random relevance; each score depends only on the seed, the
/// query text and the candidate text.
#[derive(Debug, Clone)]
pub struct RandomScorer {
    seed: u64,
}

impl RandomScorer {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl Scorer for RandomScorer {
    fn score_batch(&self, query: &QueryContext, candidates: &[Candidate]) -> Result<ScoreVector, ScoreError> {
        let seed = self.seed.to_le_bytes();
        let scores = candidates
            .iter()
            .map(|c| unit_hash(&[&seed, query.text.as_bytes(), c.text.as_bytes()]))
            .collect();
        ScoreVector::new(scores, candidates.len())
    }
}

/// Offline stand-in for a remote scorer kind.
#[derive(Debug, Clone)]
pub struct StubScorer {
    kind: ScorerKind,
    model: String,
}

impl StubScorer {
    pub fn new(kind: ScorerKind, model: String) -> Self {
        Self { kind, model }
    }
}

impl Scorer for StubScorer {
    fn score_batch(&self, query: &QueryContext, candidates: &[Candidate]) -> Result<ScoreVector, ScoreError> {
        let kind = self.kind.as_str().as_bytes();
        let scores = candidates
            .iter()
            .map(|c| unit_hash(&[kind, self.model.as_bytes(), query.text.as_bytes(), c.text.as_bytes()]))
            .collect();
        ScoreVector::new(scores, candidates.len())
    }
}
