//! Path filtering over an extracted subgraph.
//!
//! All three methods walk edges in both directions and only produce simple
//! paths (no entity visited twice).

use serde::{Deserialize, Serialize};

use crate::error::StageError;
use crate::kg::{Edge, EntityId, Graph, Query};
use crate::path::{PathSet, ReasoningPath};
use crate::scoring::{top_k_indices, Candidate, QueryContext, Scorer, ScorerConfig};

/// Caps emission at `cap` paths and remembers whether anything was cut.
struct Sink {
    paths: Vec<ReasoningPath>,
    cap: usize,
    truncated: bool,
}

impl Sink {
    fn new(cap: usize) -> Self {
        Self {
            paths: Vec::new(),
            cap,
            truncated: false,
        }
    }

    /// Returns false once the cap is exceeded.
    fn push(&mut self, p: ReasoningPath) -> bool {
        if self.paths.len() >= self.cap {
            self.truncated = true;
            return false;
        }
        self.paths.push(p);
        true
    }

    fn finish(self) -> PathSet {
        PathSet::canonical(self.paths, self.truncated)
    }
}

/// All shortest paths from `seed` to every entity within `hop_cap` hops.
pub fn shortest_paths_from(subgraph: &Graph, seed: EntityId, hop_cap: usize, path_cap: usize) -> PathSet {
    let Some(start) = subgraph.local_index(seed) else {
        log::warn!("seed {seed} is not in the subgraph");
        return PathSet::default();
    };
    let n = subgraph.entity_count();
    let mut dist = vec![usize::MAX; n];
    // parents[v]: (parent local index, edge leaving the parent towards v)
    let mut parents: Vec<Vec<(usize, Edge)>> = vec![Vec::new(); n];
    dist[start] = 0;
    let mut frontier = vec![start];
    let mut levels: Vec<Vec<usize>> = Vec::new();
    for depth in 1..=hop_cap {
        let mut next = Vec::new();
        for &u in &frontier {
            for edge in subgraph.incident_at(u) {
                let v = subgraph.local_index(edge.neighbor).expect("edge inside subgraph");
                if dist[v] == usize::MAX {
                    dist[v] = depth;
                    next.push(v);
                }
                if dist[v] == depth {
                    parents[v].push((u, edge));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        frontier = next.clone();
        levels.push(next);
    }

    let mut sink = Sink::new(path_cap);
    let mut chain: Vec<(usize, Edge)> = Vec::new();
    'targets: for level in &levels {
        for &target in level {
            if !enumerate_back(&parents, seed, target, start, &mut chain, &mut sink) {
                break 'targets;
            }
        }
    }
    sink.finish()
}

/// Walks the parent DAG from `node` back to the seed, emitting one path per
/// distinct chain. Returns false when the sink is full.
fn enumerate_back(
    parents: &[Vec<(usize, Edge)>],
    seed: EntityId,
    node: usize,
    start: usize,
    chain: &mut Vec<(usize, Edge)>,
    sink: &mut Sink,
) -> bool {
    if node == start {
        let mut p = ReasoningPath::start(seed);
        for &(_, edge) in chain.iter().rev() {
            p = p.extended(edge).expect("shortest paths are simple");
        }
        return sink.push(p);
    }
    for &(parent, edge) in &parents[node] {
        chain.push((parent, edge));
        let ok = enumerate_back(parents, seed, parent, start, chain, sink);
        chain.pop();
        if !ok {
            return false;
        }
    }
    true
}

/// Every simple path of 1..=`max_hops` hops from `seed`, expanded level by level.
pub fn complete_paths_from(subgraph: &Graph, seed: EntityId, max_hops: usize, path_cap: usize) -> PathSet {
    if !subgraph.contains_entity(seed) {
        log::warn!("seed {seed} is not in the subgraph");
        return PathSet::default();
    }
    let mut sink = Sink::new(path_cap);
    let mut frontier = vec![ReasoningPath::start(seed)];
    'levels: for _ in 0..max_hops {
        let mut next = Vec::new();
        for p in &frontier {
            let local = subgraph.local_index(p.target()).expect("path stays inside subgraph");
            for edge in subgraph.incident_at(local) {
                if let Some(q) = p.extended(edge) {
                    if !sink.push(q.clone()) {
                        break 'levels;
                    }
                    next.push(q);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    sink.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeamParams {
    pub beam_width: usize,
    pub max_hops: usize,
}

impl Default for BeamParams {
    fn default() -> Self {
        Self {
            beam_width: 128,
            max_hops: 3,
        }
    }
}

/// Scorer-guided beam search from all topic entities at once.
///
/// Each hop extends every beam member by every incident edge that keeps the
/// path simple, scores the rendered extensions in one batch and keeps the
/// best `beam_width` (ties by canonical path order). Every path that was ever
/// a beam member is returned.
pub fn beam_search_paths(
    subgraph: &Graph,
    query: &Query,
    params: &BeamParams,
    scorer: &dyn Scorer,
) -> Result<PathSet, StageError> {
    let mut beam: Vec<ReasoningPath> = Vec::new();
    for &e in &query.topic_entities {
        if subgraph.contains_entity(e) {
            beam.push(ReasoningPath::start(e));
        } else {
            log::warn!("query {}: topic entity {e} is not in the subgraph", query.id);
        }
    }
    let ctx = QueryContext::for_query(query, subgraph);
    let mut survivors = Vec::new();
    for hop in 1..=params.max_hops {
        let mut extensions = Vec::new();
        for p in &beam {
            let local = subgraph.local_index(p.target()).expect("path stays inside subgraph");
            extensions.extend(subgraph.incident_at(local).filter_map(|edge| p.extended(edge)));
        }
        if extensions.is_empty() {
            break;
        }
        let candidates: Vec<Candidate> = extensions.into_iter().map(|p| Candidate::path(subgraph, p)).collect();
        let scores = scorer
            .score_batch(&ctx, &candidates)
            .map_err(|source| StageError::BeamScore { hop, source })?;
        let path_of = |i: usize| match &candidates[i].payload {
            crate::scoring::Payload::Path(p) => p,
            _ => unreachable!("beam candidates are paths"),
        };
        beam = top_k_indices(scores.as_slice(), params.beam_width, path_of)
            .into_iter()
            .map(|i| path_of(i).clone())
            .collect();
        survivors.extend(beam.iter().cloned());
    }
    Ok(PathSet::canonical(survivors, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PfMethod {
    Spf,
    Cpf,
    Beam,
}

fn default_max_hops() -> usize {
    3
}
fn default_beam_width() -> usize {
    128
}
fn default_hop_cap() -> usize {
    4
}
fn default_path_cap() -> usize {
    10_000
}

/// Path-filtering stage configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfConfig {
    pub method: PfMethod,
    /// Depth for complete enumeration and beam search.
    #[serde(default = "default_max_hops")]
    pub max_hops: usize,
    #[serde(default = "default_beam_width")]
    pub beam_width: usize,
    /// Depth limit of the shortest-path BFS.
    #[serde(default = "default_hop_cap")]
    pub hop_cap: usize,
    /// Per-seed emission limit for enumeration methods.
    #[serde(default = "default_path_cap")]
    pub path_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scorer: Option<ScorerConfig>,
}

impl PfConfig {
    pub fn new(method: PfMethod) -> Self {
        Self {
            method,
            max_hops: default_max_hops(),
            beam_width: default_beam_width(),
            hop_cap: default_hop_cap(),
            path_cap: default_path_cap(),
            scorer: None,
        }
    }

    pub fn validate(&self) -> Result<(), StageError> {
        let fail = |m: &str| Err(StageError::Config(format!("pf: {m}")));
        if self.max_hops == 0 || self.beam_width == 0 || self.hop_cap == 0 || self.path_cap == 0 {
            return fail("max_hops, beam_width, hop_cap and path_cap must be positive");
        }
        match (&self.method, &self.scorer) {
            (PfMethod::Beam, None) => fail("beam requires a scorer"),
            (PfMethod::Beam, Some(s)) => s.validate().map_err(|e| StageError::Config(format!("pf.scorer: {e}"))),
            (_, Some(_)) => fail("scorer is only used by beam"),
            _ => Ok(()),
        }
    }
}

/// Runs the configured method over every topic entity present in the
/// subgraph. Missing topic entities are reported as warnings.
pub fn filter_paths(
    subgraph: &Graph,
    query: &Query,
    cfg: &PfConfig,
    scorer: Option<&dyn Scorer>,
) -> Result<(PathSet, Vec<String>), StageError> {
    let mut warnings = Vec::new();
    let seeds: Vec<EntityId> = query
        .topic_entities
        .iter()
        .copied()
        .filter(|&e| {
            let present = subgraph.contains_entity(e);
            if !present {
                warnings.push(format!("topic entity {} absent from subgraph", subgraph.entity_label(e)));
            }
            present
        })
        .collect();
    let paths = match cfg.method {
        PfMethod::Spf => PathSet::union(
            seeds
                .iter()
                .map(|&s| shortest_paths_from(subgraph, s, cfg.hop_cap, cfg.path_cap)),
        ),
        PfMethod::Cpf => PathSet::union(
            seeds
                .iter()
                .map(|&s| complete_paths_from(subgraph, s, cfg.max_hops, cfg.path_cap)),
        ),
        PfMethod::Beam => {
            let scorer = scorer.ok_or_else(|| StageError::Config("beam requires a scorer".into()))?;
            let params = BeamParams {
                beam_width: cfg.beam_width,
                max_hops: cfg.max_hops,
            };
            beam_search_paths(subgraph, query, &params, scorer)?
        }
    };
    if paths.truncated {
        warnings.push(format!("path enumeration truncated at {} paths per seed", cfg.path_cap));
    }
    Ok((paths, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::turing_toy_graph;
    use crate::scoring::{render_path, Bm25Scorer};

    fn rendered(g: &Graph, set: &PathSet) -> Vec<String> {
        set.iter().map(|p| render_path(p, g)).collect()
    }

    fn example_query(g: &Graph) -> Query {
        Query {
            id: "q1".into(),
            text: "Who received the Turing Award for developing the Relational Model?".into(),
            topic_entities: [g.entity_id("Relational Model").unwrap()].into(),
            answers: [g.entity_id("Edgar F. Codd").unwrap()].into(),
        }
    }

    const EXAMPLE_PATH: &str = "Relational Model -> was developed -> Edgar F. Codd -> awarded -> ACM Turing Award";

    #[test]
    fn spf_finds_example_path() {
        let g = turing_toy_graph();
        let seed = g.entity_id("Relational Model").unwrap();
        let set = shortest_paths_from(&g, seed, 4, 10_000);
        let texts = rendered(&g, &set);
        assert!(texts.contains(&EXAMPLE_PATH.to_string()), "{texts:?}");
        // the toy graph is a tree: one shortest path to each of the 6 others
        assert_eq!(set.len(), 6);
        assert!(set.iter().all(|p| p.is_valid_in(&g)));
    }

    #[test]
    fn star_gives_one_path_per_leaf() {
        let g = Graph::from_labeled((0..6).map(|i| ("hub", "r", ["l0", "l1", "l2", "l3", "l4", "l5"][i])));
        let hub = g.entity_id("hub").unwrap();
        let set = shortest_paths_from(&g, hub, 4, 100);
        assert_eq!(set.len(), 6);
        assert!(set.iter().all(|p| p.len() == 1));
    }

    #[test]
    fn spf_truncates_at_cap() {
        let g = Graph::from_labeled((0..6).map(|i| ("hub", "r", ["l0", "l1", "l2", "l3", "l4", "l5"][i])));
        let set = shortest_paths_from(&g, g.entity_id("hub").unwrap(), 4, 4);
        assert_eq!(set.len(), 4);
        assert!(set.truncated);
    }

    #[test]
    fn spf_multiple_shortest_paths_through_diamond() {
        let g = Graph::from_labeled([("s", "r", "a"), ("s", "r", "b"), ("a", "r", "t"), ("b", "r", "t")]);
        let set = shortest_paths_from(&g, g.entity_id("s").unwrap(), 4, 100);
        let t = g.entity_id("t").unwrap();
        assert_eq!(set.iter().filter(|p| p.target() == t).count(), 2);
    }

    #[test]
    fn absent_seed_gives_empty() {
        let g = turing_toy_graph();
        let sub = g.induced_subgraph(&[EntityId(0), EntityId(1)]);
        assert!(shortest_paths_from(&sub, EntityId(3), 4, 10).is_empty());
        assert!(complete_paths_from(&sub, EntityId(3), 3, 10).is_empty());
    }

    #[test]
    fn cpf_triangle() {
        let g = Graph::from_labeled([("a", "r", "b"), ("b", "r", "c"), ("c", "r", "a")]);
        let set = complete_paths_from(&g, g.entity_id("a").unwrap(), 2, 100);
        let mut texts = rendered(&g, &set);
        texts.sort();
        assert_eq!(
            texts,
            vec![
                "a -> r -> b",
                "a -> r -> b -> r -> c",
                "a -> r(inv) -> c",
                "a -> r(inv) -> c -> r(inv) -> b",
            ]
        );
    }

    #[test]
    fn cpf_one_hop_is_incident_edges() {
        let g = turing_toy_graph();
        let award = g.entity_id("ACM Turing Award").unwrap();
        let set = complete_paths_from(&g, award, 1, 100);
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn beam_on_toy_graph_keeps_example_path() {
        let g = turing_toy_graph();
        let q = example_query(&g);
        let params = BeamParams { beam_width: 2, max_hops: 2 };
        let set = beam_search_paths(&g, &q, &params, &Bm25Scorer::default()).unwrap();
        let two_hop: Vec<String> = set.iter().filter(|p| p.len() == 2).map(|p| render_path(p, &g)).collect();
        assert_eq!(two_hop, vec![EXAMPLE_PATH.to_string()]);
    }

    #[test]
    fn filter_dispatch_and_empty_subgraph() {
        let g = turing_toy_graph();
        let q = example_query(&g);
        let (spf, _) = filter_paths(&g, &q, &PfConfig::new(PfMethod::Spf), None).unwrap();
        let (cpf, _) = filter_paths(&g, &q, &PfConfig::new(PfMethod::Cpf), None).unwrap();
        assert_eq!((spf.len(), cpf.len()), (6, 4));
        assert!(filter_paths(&g, &q, &PfConfig::new(PfMethod::Beam), None).is_err());
        let empty = g.induced_subgraph(&[]);
        let (none, warnings) = filter_paths(&empty, &q, &PfConfig::new(PfMethod::Spf), None).unwrap();
        assert!(none.is_empty());
        assert_eq!(warnings.len(), 1);
    }
}
