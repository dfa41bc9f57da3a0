//! Reasoning paths: alternating entity/relation sequences rooted at a topic entity.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::kg::{Direction, Edge, EntityId, Graph, RelationId, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hop {
    pub relation: RelationId,
    pub direction: Direction,
}

/// A simple path `e0 -r1-> e1 ... -rk-> ek`. `hops[i]` joins `entities[i]`
/// and `entities[i + 1]`; a backward hop walks the stored triple against its
/// orientation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReasoningPath {
    entities: Vec<EntityId>,
    hops: Vec<Hop>,
}

impl ReasoningPath {
    pub fn start(source: EntityId) -> Self {
        Self {
            entities: vec![source],
            hops: Vec::new(),
        }
    }

    /// Builds a path from raw parts. Returns `None` when the lengths disagree.
    pub fn from_parts(entities: Vec<EntityId>, hops: Vec<Hop>) -> Option<Self> {
        (!entities.is_empty() && entities.len() == hops.len() + 1).then_some(Self { entities, hops })
    }

    pub fn source(&self) -> EntityId {
        self.entities[0]
    }

    pub fn target(&self) -> EntityId {
        *self.entities.last().expect("paths are never empty")
    }

    pub fn entities(&self) -> &[EntityId] {
        &self.entities
    }

    pub fn hops(&self) -> &[Hop] {
        &self.hops
    }

    /// Number of hops.
    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }

    pub fn contains(&self, e: EntityId) -> bool {
        self.entities.contains(&e)
    }

    /// Appends `edge`, or `None` when it would revisit an entity.
    pub fn extended(&self, edge: Edge) -> Option<Self> {
        if self.contains(edge.neighbor) {
            return None;
        }
        let mut next = self.clone();
        next.entities.push(edge.neighbor);
        next.hops.push(Hop {
            relation: edge.relation,
            direction: edge.direction,
        });
        Some(next)
    }

    /// The stored triple behind hop `i`.
    pub fn triple(&self, i: usize) -> Triple {
        let (a, b) = (self.entities[i], self.entities[i + 1]);
        let hop = self.hops[i];
        match hop.direction {
            Direction::Forward => Triple::new(a, hop.relation, b),
            Direction::Backward => Triple::new(b, hop.relation, a),
        }
    }

    /// True when every hop is a triple of `graph` and no entity repeats.
    pub fn is_valid_in(&self, graph: &Graph) -> bool {
        let distinct: HashSet<_> = self.entities.iter().collect();
        distinct.len() == self.entities.len()
            && self.entities.iter().all(|&e| graph.contains_entity(e))
            && (0..self.len()).all(|i| graph.contains_triple(&self.triple(i)))
    }
}

impl Ord for ReasoningPath {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.entities.cmp(&other.entities))
            .then_with(|| self.hops.cmp(&other.hops))
    }
}

impl PartialOrd for ReasoningPath {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An ordered, duplicate-free collection of paths.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathSet {
    paths: Vec<ReasoningPath>,
    pub truncated: bool,
}

impl PathSet {
    /// Sorts into canonical order (length, then entity ids, then hops) and dedups.
    pub fn canonical(mut paths: Vec<ReasoningPath>, truncated: bool) -> Self {
        paths.sort();
        paths.dedup();
        Self { paths, truncated }
    }

    /// Keeps the given order, dropping later duplicates.
    pub fn ordered(paths: Vec<ReasoningPath>, truncated: bool) -> Self {
        let mut seen = HashSet::with_capacity(paths.len());
        let paths = paths.into_iter().filter(|p| seen.insert(p.clone())).collect();
        Self { paths, truncated }
    }

    /// Canonical union of several sets.
    pub fn union(sets: impl IntoIterator<Item = PathSet>) -> Self {
        let mut truncated = false;
        let mut all = Vec::new();
        for set in sets {
            truncated |= set.truncated;
            all.extend(set.paths);
        }
        Self::canonical(all, truncated)
    }

    pub fn paths(&self) -> &[ReasoningPath] {
        &self.paths
    }

    pub fn into_paths(self) -> Vec<ReasoningPath> {
        self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ReasoningPath> {
        self.paths.iter()
    }

    /// Every entity appearing anywhere on any path.
    pub fn entities(&self) -> BTreeSet<EntityId> {
        self.paths.iter().flat_map(|p| p.entities().iter().copied()).collect()
    }
}

impl<'a> IntoIterator for &'a PathSet {
    type Item = &'a ReasoningPath;
    type IntoIter = std::slice::Iter<'a, ReasoningPath>;

    fn into_iter(self) -> Self::IntoIter {
        self.paths.iter()
    }
}
