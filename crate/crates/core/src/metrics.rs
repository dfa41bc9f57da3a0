//! Set-overlap metrics between retrieved entities and ground-truth answers.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{EntityId, Graph, Query};
use crate::path::PathSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("hit ratio of an empty list is undefined")]
    EmptyHits,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SetMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl SetMetrics {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self { precision, recall, f1 }
    }
}

pub fn set_metrics(pred: &BTreeSet<EntityId>, truth: &BTreeSet<EntityId>) -> SetMetrics {
    let overlap = pred.intersection(truth).count() as f64;
    let ratio = |d: usize| if d == 0 { 0.0 } else { overlap / d as f64 };
    SetMetrics::from_pr(ratio(pred.len()), ratio(truth.len()))
}

pub fn evaluate_subgraph(subgraph: &Graph, query: &Query) -> SetMetrics {
    let pred: BTreeSet<EntityId> = subgraph.entities().iter().copied().collect();
    set_metrics(&pred, &query.answers)
}

/// Every entity on every path counts as predicted, not just endpoints.
pub fn evaluate_paths(paths: &PathSet, query: &Query) -> (SetMetrics, bool) {
    let pred = paths.entities();
    let hit = pred.intersection(&query.answers).next().is_some();
    (set_metrics(&pred, &query.answers), hit)
}

pub fn hit_ratio(hits: &[bool]) -> Result<f64, MetricError> {
    if hits.is_empty() {
        return Err(MetricError::EmptyHits);
    }
    Ok(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
}

/// Means over the queries that have ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub hit_ratio: f64,
    /// Queries that contributed to the means.
    pub query_count: usize,
    /// Queries left out because they have no answers.
    pub skipped_no_truth: usize,
}

/// One query's contribution to a [`StageMetrics`] aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    #[serde(flatten)]
    pub set: SetMetrics,
    pub hit: bool,
    pub has_truth: bool,
}

pub fn aggregate<'a>(rows: impl IntoIterator<Item = &'a QueryMetrics>) -> StageMetrics {
    let mut out = StageMetrics::default();
    let mut hits = Vec::new();
    for row in rows {
        if !row.has_truth {
            out.skipped_no_truth += 1;
            continue;
        }
        out.precision += row.set.precision;
        out.recall += row.set.recall;
        out.f1 += row.set.f1;
        hits.push(row.hit);
    }
    out.query_count = hits.len();
    if let Ok(hr) = hit_ratio(&hits) {
        let n = hits.len() as f64;
        out.precision /= n;
        out.recall /= n;
        out.f1 /= n;
        out.hit_ratio = hr;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::turing_toy_graph;

    fn ids(v: &[u32]) -> BTreeSet<EntityId> {
        v.iter().map(|&i| EntityId(i)).collect()
    }

    #[test]
    fn basic_cases() {
        let m = set_metrics(&ids(&[1]), &ids(&[1, 2]));
        assert_eq!((m.precision, m.recall), (1.0, 0.5));
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(set_metrics(&ids(&[3]), &ids(&[3])), SetMetrics::from_pr(1.0, 1.0));
        assert_eq!(set_metrics(&ids(&[1]), &ids(&[2])), SetMetrics::default());
        assert_eq!(set_metrics(&ids(&[]), &ids(&[])), SetMetrics::default());
    }

    #[test]
    fn subgraph_precision_on_toy() {
        let g = turing_toy_graph();
        let q = Query {
            id: "q".into(),
            text: String::new(),
            topic_entities: ids(&[0]),
            answers: [g.entity_id("Edgar F. Codd").unwrap()].into(),
        };
        let m = evaluate_subgraph(&g, &q);
        assert_eq!(m.recall, 1.0);
        assert!((m.precision - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(evaluate_subgraph(&g.induced_subgraph(&[]), &q), SetMetrics::default());
    }

    #[test]
    fn hit_ratio_cases() {
        assert_eq!(hit_ratio(&[true, false]), Ok(0.5));
        assert_eq!(hit_ratio(&[]), Err(MetricError::EmptyHits));
    }

    #[test]
    fn aggregate_skips_queries_without_truth() {
        let row = |p, r, hit, has_truth| QueryMetrics {
            set: SetMetrics::from_pr(p, r),
            hit,
            has_truth,
        };
        let rows = [row(1.0, 1.0, true, true), row(0.0, 0.0, false, true), row(1.0, 1.0, true, false)];
        let agg = aggregate(&rows);
        assert_eq!(agg.query_count, 2);
        assert_eq!(agg.skipped_no_truth, 1);
        assert_eq!((agg.precision, agg.hit_ratio), (0.5, 0.5));
        assert_eq!(aggregate(&[]), StageMetrics::default());
    }
}
