//! Graph generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use modular_kgqa::kg::{Direction, EntityId, Graph, Query};
use modular_kgqa::path::{Hop, ReasoningPath};
use modular_kgqa::scoring::{unit_hash, Candidate, QueryContext, ScoreError, ScoreVector, Scorer};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub const EXAMPLE_QUESTION: &str = "Who received the Turing Award for developing the Relational Model?";
pub const EXAMPLE_PATH: &str = "Relational Model -> was developed -> Edgar F. Codd -> awarded -> ACM Turing Award";

pub fn example_query(g: &Graph) -> Query {
    Query {
        id: "q1".into(),
        text: EXAMPLE_QUESTION.into(),
        topic_entities: [g.entity_id("Relational Model").unwrap()].into(),
        answers: [g.entity_id("Edgar F. Codd").unwrap()].into(),
    }
}

/// `edges` random triples over at most `nodes` entities and `relations` labels.
pub fn random_graph(rng: &mut impl Rng, nodes: usize, edges: usize, relations: usize) -> Graph {
    let labels: Vec<(String, String, String)> = (0..edges)
        .map(|_| {
            (
                format!("e{}", rng.random_range(0..nodes)),
                format!("r{}", rng.random_range(0..relations)),
                format!("e{}", rng.random_range(0..nodes)),
            )
        })
        .collect();
    Graph::from_labeled(labels.iter().map(|(s, r, t)| (s.as_str(), r.as_str(), t.as_str())))
}

/// A random non-empty subset of the graph's entities, at most `max` large.
pub fn random_seeds(rng: &mut impl Rng, g: &Graph, max: usize) -> BTreeSet<EntityId> {
    let ents = g.entities();
    let k = rng.random_range(1..=max.min(ents.len()));
    let mut out = BTreeSet::new();
    while out.len() < k {
        out.insert(ents[rng.random_range(0..ents.len())]);
    }
    out
}

/// Solves `(I - (1-λ) T) p = λ e` where `T` is the column-stochastic walk
/// matrix of the symmetrized multigraph and dangling columns jump to `e`.
pub fn dense_ppr(g: &Graph, seeds: &BTreeSet<EntityId>, lambda: f64) -> BTreeMap<EntityId, f64> {
    let ents = g.entities();
    let n = ents.len();
    let idx: HashMap<EntityId, usize> = ents.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut adj = DMatrix::<f64>::zeros(n, n);
    for t in g.triples() {
        let (s, d) = (idx[&t.source], idx[&t.target]);
        adj[(d, s)] += 1.0;
        adj[(s, d)] += 1.0;
    }
    let mut pref = DVector::<f64>::zeros(n);
    for s in seeds {
        pref[idx[s]] = 1.0 / seeds.len() as f64;
    }
    let mut walk = DMatrix::<f64>::zeros(n, n);
    for u in 0..n {
        let deg: f64 = adj.column(u).sum();
        for v in 0..n {
            walk[(v, u)] = if deg == 0.0 { pref[v] } else { adj[(v, u)] / deg };
        }
    }
    let system = DMatrix::<f64>::identity(n, n) - walk * (1.0 - lambda);
    let p = system.lu().solve(&(pref * lambda)).expect("non-singular system");
    ents.iter().enumerate().map(|(i, &e)| (e, p[i])).collect()
}

/// Every simple path of 1..=`max_len` hops from `seed`, found by scanning
/// the raw triple list.
pub fn all_simple_paths(g: &Graph, seed: EntityId, max_len: usize) -> BTreeSet<ReasoningPath> {
    fn walk(
        g: &Graph,
        ents: &mut Vec<EntityId>,
        hops: &mut Vec<Hop>,
        max_len: usize,
        out: &mut BTreeSet<ReasoningPath>,
    ) {
        if !hops.is_empty() {
            out.insert(ReasoningPath::from_parts(ents.clone(), hops.clone()).unwrap());
        }
        if hops.len() == max_len {
            return;
        }
        let cur = *ents.last().unwrap();
        for t in g.triples() {
            let step = if t.source == cur {
                Some((t.target, Direction::Forward))
            } else if t.target == cur {
                Some((t.source, Direction::Backward))
            } else {
                None
            };
            if let Some((next, direction)) = step {
                if ents.contains(&next) {
                    continue;
                }
                ents.push(next);
                hops.push(Hop {
                    relation: t.relation,
                    direction,
                });
                walk(g, ents, hops, max_len, out);
                ents.pop();
                hops.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(g, &mut vec![seed], &mut Vec::new(), max_len, &mut out);
    out
}

/// Shortest paths to every reachable target, derived from the exhaustive set.
pub fn shortest_paths_oracle(g: &Graph, seed: EntityId, hop_cap: usize) -> BTreeSet<ReasoningPath> {
    let all = all_simple_paths(g, seed, hop_cap);
    let mut dist: HashMap<EntityId, usize> = HashMap::new();
    for p in &all {
        let d = dist.entry(p.target()).or_insert(usize::MAX);
        *d = (*d).min(p.len());
    }
    all.into_iter().filter(|p| dist[&p.target()] == p.len()).collect()
}

/// Hash of the candidate text; distinct texts collide with negligible probability.
pub struct HashScorer;

impl Scorer for HashScorer {
    fn score_batch(&self, _: &QueryContext, c: &[Candidate]) -> Result<ScoreVector, ScoreError> {
        ScoreVector::new(c.iter().map(|x| unit_hash(&[x.text.as_bytes()])).collect(), c.len())
    }
}

/// Always returns the same value.
pub struct ConstScorer(pub f64);

impl Scorer for ConstScorer {
    fn score_batch(&self, _: &QueryContext, c: &[Candidate]) -> Result<ScoreVector, ScoreError> {
        ScoreVector::new(vec![self.0; c.len()], c.len())
    }
}

/// Scores a path by the ranks of its prefixes, most significant first, so
/// that a worse prefix can never be outscored by its extensions.
pub struct PrefixScorer {
    rank: HashMap<String, u64>,
}

const RANK_BITS: u32 = 17;

impl PrefixScorer {
    /// `texts`: rendered forms of every path the scorer will see, each
    /// given a distinct pseudo-random rank.
    pub fn new(texts: impl IntoIterator<Item = String>) -> Self {
        let mut texts: Vec<String> = texts.into_iter().collect();
        texts.sort();
        texts.dedup();
        assert!(texts.len() < (1 << RANK_BITS), "too many paths for the rank width");
        texts.sort_by(|a, b| {
            unit_hash(&[a.as_bytes()])
                .partial_cmp(&unit_hash(&[b.as_bytes()]))
                .unwrap()
                .then_with(|| a.cmp(b))
        });
        let rank = texts.into_iter().enumerate().map(|(i, t)| (t, i as u64 + 1)).collect();
        Self { rank }
    }
}

impl Scorer for PrefixScorer {
    fn score_batch(&self, _: &QueryContext, c: &[Candidate]) -> Result<ScoreVector, ScoreError> {
        let scores = c
            .iter()
            .map(|cand| {
                // prefixes of "a -> r -> b -> s -> c" end at every entity label
                let parts: Vec<&str> = cand.text.split(" -> ").collect();
                let mut score = 0.0;
                let mut scale = 1.0;
                for end in (3..=parts.len()).step_by(2) {
                    scale /= f64::from(1u32 << RANK_BITS);
                    let prefix = parts[..end].join(" -> ");
                    score += self.rank[&prefix] as f64 * scale;
                }
                score
            })
            .collect();
        ScoreVector::new(scores, c.len())
    }
}
