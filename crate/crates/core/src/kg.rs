//! Text-attributed knowledge graph store.
//!
//! A [`Graph`] is an immutable set of `(source, relation, target)` triples over
//! interned entity and relation labels, with forward and backward adjacency in
//! CSR form. Subgraphs produced by [`Graph::induced_subgraph`] share the
//! interning tables of their parent, so ids stay comparable across every stage
//! of a pipeline.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KgError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("triples file {0} contains no triples")]
    EmptyGraph(PathBuf),
    #[error("entity id {0} is not part of this graph")]
    InvalidEntity(u32),
}

pub type Result<T> = std::result::Result<T, KgError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub source: EntityId,
    pub relation: RelationId,
    pub target: EntityId,
}

impl Triple {
    pub fn new(source: EntityId, relation: RelationId, target: EntityId) -> Self {
        Self {
            source,
            relation,
            target,
        }
    }
}

/// Orientation of a traversed edge relative to the stored triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// Which adjacency lists [`Graph::out_edges`] should consult.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Traversal {
    Forward,
    Backward,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub relation: RelationId,
    pub neighbor: EntityId,
    pub direction: Direction,
}

/// Dense label interning table; ids are assigned in first-occurrence order.
#[derive(Debug, Default, Clone)]
pub struct Interner {
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    pub fn intern(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: u32) -> Option<&str> {
        self.labels.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Default, Clone)]
pub struct Vocab {
    pub entities: Interner,
    pub relations: Interner,
}

#[derive(Debug, Clone)]
struct Csr {
    offsets: Vec<usize>,
    edges: Vec<(RelationId, EntityId)>,
}

impl Csr {
    fn build(node_count: usize, mut rows: Vec<(usize, RelationId, EntityId)>) -> Self {
        rows.sort_unstable();
        let mut offsets = vec![0usize; node_count + 1];
        for &(row, _, _) in &rows {
            offsets[row + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let edges = rows.into_iter().map(|(_, r, e)| (r, e)).collect();
        Self { offsets, edges }
    }

    fn row(&self, i: usize) -> &[(RelationId, EntityId)] {
        &self.edges[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Symmetrized adjacency over local node indices; row `i` lists the
/// neighbors of `entities()[i]` in [`Graph::incident_at`] order.
#[derive(Debug, Clone)]
pub struct SymAdjacency {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl SymAdjacency {
    pub fn neighbors(&self, local: usize) -> &[u32] {
        &self.neighbors[self.offsets[local]..self.offsets[local + 1]]
    }

    pub fn degree(&self, local: usize) -> usize {
        self.offsets[local + 1] - self.offsets[local]
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Immutable directed labeled graph.
#[derive(Debug, Clone)]
pub struct Graph {
    vocab: Arc<Vocab>,
    nodes: Vec<EntityId>,
    triples: Vec<Triple>,
    forward: Csr,
    backward: Csr,
    sym: OnceLock<SymAdjacency>,
}

impl Graph {
    /// Builds a graph over `nodes` (sorted, unique) and `triples` whose
    /// endpoints all lie in `nodes`.
    fn assemble(vocab: Arc<Vocab>, nodes: Vec<EntityId>, mut triples: Vec<Triple>) -> Self {
        triples.sort_unstable();
        triples.dedup();
        let full = nodes.len() == vocab.entities.len();
        let local = |e: EntityId| -> usize {
            if full {
                e.index()
            } else {
                nodes.binary_search(&e).expect("triple endpoint outside node set")
            }
        };
        let fwd_rows = triples
            .iter()
            .map(|t| (local(t.source), t.relation, t.target))
            .collect();
        let bwd_rows = triples
            .iter()
            .map(|t| (local(t.target), t.relation, t.source))
            .collect();
        let forward = Csr::build(nodes.len(), fwd_rows);
        let backward = Csr::build(nodes.len(), bwd_rows);
        Self {
            vocab,
            nodes,
            triples,
            forward,
            backward,
            sym: OnceLock::new(),
        }
    }

    /// Builds a graph from labeled triples, interning labels in order.
    pub fn from_labeled<'a, I>(triples: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    {
        let mut vocab = Vocab::default();
        let triples: Vec<Triple> = triples
            .into_iter()
            .map(|(s, r, t)| {
                let s = EntityId(vocab.entities.intern(s));
                let r = RelationId(vocab.relations.intern(r));
                let t = EntityId(vocab.entities.intern(t));
                Triple::new(s, r, t)
            })
            .collect();
        let nodes = (0..vocab.entities.len() as u32).map(EntityId).collect();
        Self::assemble(Arc::new(vocab), nodes, triples)
    }

    /// Loads a `source<TAB>relation<TAB>target` file. Blank lines are ignored.
    pub fn load_triples(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| KgError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut labeled: Vec<(String, String, String)> = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| KgError::Io {
                path: path.to_owned(),
                source,
            })?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(KgError::Parse {
                    line: n + 1,
                    message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            if fields.iter().any(|f| f.is_empty()) {
                return Err(KgError::Parse {
                    line: n + 1,
                    message: "empty label".into(),
                });
            }
            labeled.push((fields[0].into(), fields[1].into(), fields[2].into()));
        }
        if labeled.is_empty() {
            return Err(KgError::EmptyGraph(path.to_owned()));
        }
        Ok(Self::from_labeled(
            labeled
                .iter()
                .map(|(s, r, t)| (s.as_str(), r.as_str(), t.as_str())),
        ))
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for t in &self.triples {
            writeln!(
                out,
                "{}\t{}\t{}",
                self.entity_label(t.source),
                self.relation_label(t.relation),
                self.entity_label(t.target)
            )?;
        }
        Ok(())
    }

    pub fn vocab(&self) -> &Arc<Vocab> {
        &self.vocab
    }

    pub fn entities(&self) -> &[EntityId] {
        &self.nodes
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn entity_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    /// Distinct relations used by at least one triple of this graph.
    pub fn relations(&self) -> Vec<RelationId> {
        let set: BTreeSet<RelationId> = self.triples.iter().map(|t| t.relation).collect();
        set.into_iter().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Position of `e` in [`Graph::entities`], if it belongs to this graph.
    pub fn local_index(&self, e: EntityId) -> Option<usize> {
        if self.nodes.len() == self.vocab.entities.len() {
            (e.index() < self.nodes.len()).then_some(e.index())
        } else {
            self.nodes.binary_search(&e).ok()
        }
    }

    pub fn contains_entity(&self, e: EntityId) -> bool {
        self.local_index(e).is_some()
    }

    pub fn contains_triple(&self, t: &Triple) -> bool {
        self.triples.binary_search(t).is_ok()
    }

    /// Label of an entity. Panics on ids foreign to the vocabulary.
    pub fn entity_label(&self, e: EntityId) -> &str {
        self.vocab.entities.label(e.0).expect("entity id outside vocabulary")
    }

    pub fn relation_label(&self, r: RelationId) -> &str {
        self.vocab.relations.label(r.0).expect("relation id outside vocabulary")
    }

    pub fn entity_id(&self, label: &str) -> Option<EntityId> {
        self.vocab
            .entities
            .get(label)
            .map(EntityId)
            .filter(|&e| self.contains_entity(e))
    }

    pub fn relation_id(&self, label: &str) -> Option<RelationId> {
        self.vocab.relations.get(label).map(RelationId)
    }

    /// Outgoing `(relation, target)` pairs by local index, sorted.
    pub fn forward_at(&self, local: usize) -> &[(RelationId, EntityId)] {
        self.forward.row(local)
    }

    /// Incoming `(relation, source)` pairs by local index, sorted.
    pub fn backward_at(&self, local: usize) -> &[(RelationId, EntityId)] {
        self.backward.row(local)
    }

    /// Degree in the symmetrized graph (in + out).
    pub fn degree_at(&self, local: usize) -> usize {
        self.forward.row(local).len() + self.backward.row(local).len()
    }

    /// Every edge incident to the node at `local`, forward first, then backward.
    pub fn incident_at(&self, local: usize) -> impl Iterator<Item = Edge> + '_ {
        let fwd = self.forward.row(local).iter().map(|&(relation, neighbor)| Edge {
            relation,
            neighbor,
            direction: Direction::Forward,
        });
        let bwd = self.backward.row(local).iter().map(|&(relation, neighbor)| Edge {
            relation,
            neighbor,
            direction: Direction::Backward,
        });
        fwd.chain(bwd)
    }

    /// Symmetrized local adjacency, built on first use.
    pub fn sym_adjacency(&self) -> &SymAdjacency {
        self.sym.get_or_init(|| {
            let n = self.nodes.len();
            let mut offsets = Vec::with_capacity(n + 1);
            let mut neighbors = Vec::with_capacity(2 * self.triples.len());
            offsets.push(0);
            for i in 0..n {
                for edge in self.incident_at(i) {
                    let j = self.local_index(edge.neighbor).expect("adjacency stays inside the graph");
                    neighbors.push(j as u32);
                }
                offsets.push(neighbors.len());
            }
            SymAdjacency { offsets, neighbors }
        })
    }

    pub fn out_edges(&self, v: EntityId, traversal: Traversal) -> Result<Vec<Edge>> {
        let local = self.local_index(v).ok_or(KgError::InvalidEntity(v.0))?;
        let edges = match traversal {
            Traversal::Both => self.incident_at(local).collect(),
            Traversal::Forward => self
                .incident_at(local)
                .filter(|e| e.direction == Direction::Forward)
                .collect(),
            Traversal::Backward => self
                .incident_at(local)
                .filter(|e| e.direction == Direction::Backward)
                .collect(),
        };
        Ok(edges)
    }

    /// Triples with both endpoints in `keep`. Ids outside this graph are ignored.
    pub fn induced_subgraph<'a, I>(&self, keep: I) -> Graph
    where
        I: IntoIterator<Item = &'a EntityId>,
    {
        let mut nodes: Vec<EntityId> = keep
            .into_iter()
            .copied()
            .filter(|&e| self.contains_entity(e))
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        let mut triples = Vec::new();
        for &v in &nodes {
            let local = self.local_index(v).expect("filtered above");
            for &(relation, target) in self.forward_at(local) {
                if nodes.binary_search(&target).is_ok() {
                    triples.push(Triple::new(v, relation, target));
                }
            }
        }
        Graph::assemble(Arc::clone(&self.vocab), nodes, triples)
    }

    /// A graph over `nodes` restricted to the given triples of this graph.
    ///
    /// Triple endpoints are added to the node set when missing.
    pub fn restrict(&self, nodes: impl IntoIterator<Item = EntityId>, triples: Vec<Triple>) -> Graph {
        let mut nodes: Vec<EntityId> = nodes
            .into_iter()
            .chain(triples.iter().flat_map(|t| [t.source, t.target]))
            .filter(|&e| self.contains_entity(e))
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        let triples = triples.into_iter().filter(|t| self.contains_triple(t)).collect();
        Graph::assemble(Arc::clone(&self.vocab), nodes, triples)
    }
}

/// A question with pre-linked topic entities and gold answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub id: String,
    pub text: String,
    pub topic_entities: BTreeSet<EntityId>,
    pub answers: BTreeSet<EntityId>,
}

impl Query {
    /// Queries with no resolvable answer are kept but excluded from metric means.
    pub fn has_answers(&self) -> bool {
        !self.answers.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedQuery {
    pub id: String,
    pub unresolved_topic_entities: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct QuerySet {
    pub queries: Vec<Query>,
    pub skipped: Vec<SkippedQuery>,
    pub dropped_answers: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryLine {
    id: String,
    question: String,
    topic_entities: Vec<String>,
    answers: Vec<String>,
}

/// Parses JSON-lines queries and resolves their labels against `graph`.
pub fn parse_queries<R: BufRead>(reader: R, graph: &Graph) -> Result<QuerySet> {
    let mut set = QuerySet::default();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| KgError::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: QueryLine = serde_json::from_str(&line).map_err(|e| KgError::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        let mut topic = BTreeSet::new();
        let mut unresolved = Vec::new();
        for label in &raw.topic_entities {
            match graph.entity_id(label) {
                Some(e) => {
                    topic.insert(e);
                }
                None => unresolved.push(label.clone()),
            }
        }
        if topic.is_empty() || !unresolved.is_empty() {
            if unresolved.is_empty() {
                // no topic entities listed at all
                unresolved.push(String::new());
            }
            set.skipped.push(SkippedQuery {
                id: raw.id,
                unresolved_topic_entities: unresolved,
            });
            continue;
        }
        let mut answers = BTreeSet::new();
        for label in &raw.answers {
            match graph.entity_id(label) {
                Some(e) => {
                    answers.insert(e);
                }
                None => set.dropped_answers += 1,
            }
        }
        if answers.is_empty() {
            log::warn!("query {} has no resolvable answers", raw.id);
        }
        set.queries.push(Query {
            id: raw.id,
            text: raw.question,
            topic_entities: topic,
            answers,
        });
    }
    if set.dropped_answers > 0 {
        log::warn!("dropped {} unresolvable answer labels", set.dropped_answers);
    }
    Ok(set)
}

pub fn load_queries(path: impl AsRef<Path>, graph: &Graph) -> Result<QuerySet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| KgError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_queries(BufReader::new(file), graph)
}

/// The six-triple Turing Award graph used throughout the docs and tests.
pub fn turing_toy_graph() -> Graph {
    Graph::from_labeled([
        ("PostgreSQL", "was created", "Michael Stonebraker"),
        ("Michael Stonebraker", "awarded", "ACM Turing Award"),
        ("Relational Model", "was developed", "Edgar F. Codd"),
        ("Edgar F. Codd", "awarded", "ACM Turing Award"),
        ("Transaction Processing", "was pioneered", "Jim Gray"),
        ("Jim Gray", "awarded", "ACM Turing Award"),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn toy_graph_counts() {
        let g = turing_toy_graph();
        assert_eq!(g.entity_count(), 7);
        // "was created", "awarded", "was developed", "was pioneered"
        assert_eq!(g.relations().len(), 4);
        assert_eq!(g.triple_count(), 6);
    }

    #[test]
    fn load_toy_from_tsv() {
        let f = write_tmp(
            "PostgreSQL\twas created\tMichael Stonebraker\n\
             Michael Stonebraker\tawarded\tACM Turing Award\n\
             Relational Model\twas developed\tEdgar F. Codd\n\
             Edgar F. Codd\tawarded\tACM Turing Award\n\
             Transaction Processing\twas pioneered\tJim Gray\n\
             Jim Gray\tawarded\tACM Turing Award\n",
        );
        let g = Graph::load_triples(f.path()).unwrap();
        assert_eq!((g.entity_count(), g.triple_count()), (7, 6));
        assert_eq!(g.entity_id("PostgreSQL"), Some(EntityId(0)));
        assert_eq!(g.entity_label(EntityId(1)), "Michael Stonebraker");
    }

    #[test]
    fn self_loop_graph() {
        let f = write_tmp("a\tr\ta\n");
        let g = Graph::load_triples(f.path()).unwrap();
        assert_eq!((g.entity_count(), g.relations().len(), g.triple_count()), (1, 1, 1));
        assert_eq!(g.degree_at(0), 2);
    }

    #[test]
    fn duplicates_collapse() {
        let f = write_tmp("a\tr\tb\na\tr\tb\na\tr\tb\n");
        let g = Graph::load_triples(f.path()).unwrap();
        assert_eq!(g.triple_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let f = write_tmp("a\tr\tb\na\tr\n");
        match Graph::load_triples(f.path()) {
            Err(KgError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        let f = write_tmp("");
        assert!(matches!(Graph::load_triples(f.path()), Err(KgError::EmptyGraph(_))));
    }

    #[test]
    fn out_edges_directions() {
        let g = turing_toy_graph();
        let codd = g.entity_id("Edgar F. Codd").unwrap();
        let fwd = g.out_edges(codd, Traversal::Forward).unwrap();
        assert_eq!(fwd.len(), 1);
        assert_eq!(g.relation_label(fwd[0].relation), "awarded");
        assert_eq!(g.entity_label(fwd[0].neighbor), "ACM Turing Award");
        let bwd = g.out_edges(codd, Traversal::Backward).unwrap();
        assert_eq!(bwd.len(), 1);
        assert_eq!(g.relation_label(bwd[0].relation), "was developed");
        assert_eq!(g.entity_label(bwd[0].neighbor), "Relational Model");
        let both = g.out_edges(codd, Traversal::Both).unwrap();
        assert_eq!(both, [fwd, bwd].concat());
    }

    #[test]
    fn out_edges_invalid_and_isolated() {
        let g = turing_toy_graph();
        assert!(matches!(
            g.out_edges(EntityId(99), Traversal::Both),
            Err(KgError::InvalidEntity(99))
        ));
        let iso = g.induced_subgraph(&[EntityId(0)]);
        assert!(iso.out_edges(EntityId(0), Traversal::Both).unwrap().is_empty());
    }

    #[test]
    fn induced_subgraph_examples() {
        let g = turing_toy_graph();
        let ids = |labels: &[&str]| -> Vec<EntityId> {
            labels.iter().map(|l| g.entity_id(l).unwrap()).collect()
        };
        let sub = g.induced_subgraph(&ids(&["Relational Model", "Edgar F. Codd", "ACM Turing Award"]));
        assert_eq!(sub.triple_count(), 2);
        assert_eq!(sub.entity_count(), 3);
        let all = g.induced_subgraph(g.entities());
        assert_eq!(all.triples(), g.triples());
        let lone = g.induced_subgraph(&ids(&["PostgreSQL"]));
        assert_eq!((lone.entity_count(), lone.triple_count()), (1, 0));
        // subgraph ids resolve through the shared vocabulary
        assert_eq!(sub.entity_id("PostgreSQL"), None);
        assert!(sub.entity_id("Edgar F. Codd").is_some());
    }

    #[test]
    fn adjacency_in_subgraph_uses_local_rows() {
        let g = turing_toy_graph();
        let award = g.entity_id("ACM Turing Award").unwrap();
        let gray = g.entity_id("Jim Gray").unwrap();
        let sub = g.induced_subgraph(&[award, gray]);
        let edges = sub.out_edges(award, Traversal::Backward).unwrap();
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].neighbor, gray);
    }

    #[test]
    fn queries_resolve_and_skip() {
        let g = turing_toy_graph();
        let input = r#"{"id":"q1","question":"Who received the Turing Award for developing the Relational Model?","topic_entities":["Relational Model"],"answers":["Edgar F. Codd"]}
{"id":"q2","question":"empty","topic_entities":["PostgreSQL"],"answers":[]}
{"id":"q3","question":"missing","topic_entities":["Ingres"],"answers":["Michael Stonebraker"]}
{"id":"q4","question":"dangling","topic_entities":["Jim Gray"],"answers":["Nobody","ACM Turing Award"]}
"#;
        let set = parse_queries(Cursor::new(input), &g).unwrap();
        assert_eq!(set.queries.len(), 3);
        let q1 = &set.queries[0];
        assert_eq!((q1.topic_entities.len(), q1.answers.len()), (1, 1));
        assert!(!set.queries[1].has_answers());
        assert_eq!(set.skipped.len(), 1);
        assert_eq!(set.skipped[0].id, "q3");
        assert_eq!(set.dropped_answers, 1);
    }

    #[test]
    fn malformed_query_line() {
        let g = turing_toy_graph();
        let input = "{\"id\":\"q1\",\"question\":\"x\",\"topic_entities\":[\"Jim Gray\"],\"answers\":[]}\nnot json\n";
        match parse_queries(Cursor::new(input), &g) {
            Err(KgError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let extra = "{\"id\":\"q1\",\"question\":\"x\",\"topic_entities\":[],\"answers\":[],\"x\":1}\n";
        assert!(parse_queries(Cursor::new(extra), &g).is_err());
    }
}
