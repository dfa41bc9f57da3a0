use std::collections::{BTreeSet, HashMap};

use super::{tokenize, Candidate, QueryContext, ScoreError, ScoreVector, Scorer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

/// Document frequencies and length statistics of one candidate corpus.
#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub avg_len: f64,
    pub doc_freq: HashMap<String, usize>,
}

impl CorpusStats {
    pub fn from_docs<D: AsRef<[String]>>(docs: &[D]) -> Self {
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        let mut total = 0usize;
        for doc in docs {
            let doc = doc.as_ref();
            total += doc.len();
            let distinct: BTreeSet<&String> = doc.iter().collect();
            for term in distinct {
                *doc_freq.entry(term.clone()).or_default() += 1;
            }
        }
        let avg_len = if docs.is_empty() {
            0.0
        } else {
            total as f64 / docs.len() as f64
        };
        Self {
            doc_count: docs.len(),
            avg_len,
            doc_freq,
        }
    }

    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, floored at zero.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.doc_count as f64;
        let df = self.doc_freq.get(term).copied().unwrap_or(0) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln().max(0.0)
    }
}

/// Okapi BM25 of one document. Query terms are treated as a set.
pub fn bm25_score(stats: &CorpusStats, params: Bm25Params, query_terms: &[String], doc_terms: &[String]) -> f64 {
    let mut tf: HashMap<&str, usize> = HashMap::new();
    for t in doc_terms {
        *tf.entry(t.as_str()).or_default() += 1;
    }
    let len_ratio = if stats.avg_len > 0.0 {
        doc_terms.len() as f64 / stats.avg_len
    } else {
        1.0
    };
    let norm = params.k1 * (1.0 - params.b + params.b * len_ratio);
    let distinct: BTreeSet<&str> = query_terms.iter().map(String::as_str).collect();
    distinct
        .into_iter()
        .filter_map(|q| tf.get(q).map(|&f| (q, f as f64)))
        .map(|(q, f)| stats.idf(q) * f * (params.k1 + 1.0) / (f + norm))
        .sum()
}

/// BM25 with corpus statistics computed over the candidates of each call.
#[derive(Debug, Clone, Default)]
pub struct Bm25Scorer {
    params: Bm25Params,
}

impl Bm25Scorer {
    pub fn new(params: Bm25Params) -> Self {
        Self { params }
    }
}

impl Scorer for Bm25Scorer {
    fn score_batch(&self, query: &QueryContext, candidates: &[Candidate]) -> Result<ScoreVector, ScoreError> {
        let docs: Vec<Vec<String>> = candidates.iter().map(|c| tokenize(&c.text)).collect();
        let stats = CorpusStats::from_docs(&docs);
        let q = tokenize(&query.text);
        let scores = docs.iter().map(|d| bm25_score(&stats, self.params, &q, d)).collect();
        ScoreVector::new(scores, candidates.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{turing_toy_graph, RelationId};
    use crate::scoring::{Candidate, Payload};

    fn cands(texts: &[&str]) -> Vec<Candidate> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Candidate {
                text: t.to_string(),
                payload: Payload::Relation(RelationId(i as u32)),
            })
            .collect()
    }

    fn score(query: &str, texts: &[&str]) -> Vec<f64> {
        Bm25Scorer::default()
            .score_batch(&QueryContext::new(query), &cands(texts))
            .unwrap()
            .into_vec()
    }

    #[test]
    fn no_overlap_scores_zero() {
        assert_eq!(score("turing", &["postgresql was created", "jim gray"]), vec![0.0, 0.0]);
    }

    #[test]
    fn identical_documents_score_equally() {
        let s = score("award codd", &["codd award", "codd award", "codd award"]);
        assert!(s.windows(2).all(|w| w[0] == w[1]));
        assert!(s[0] > 0.0);
    }

    #[test]
    fn hand_evaluated_three_document_corpus() {
        // docs (tokenized): [award, winner, award] (3), [award] (1), [database, systems] (2)
        // N = 3, avgdl = 2, df(award) = 2, idf = ln(1 + 1.5 / 2.5) = ln(1.6)
        let s = score("award", &["award winner award", "Award", "database systems"]);
        let idf = 1.6f64.ln();
        let (k1, b) = (1.2, 0.75);
        let d0 = idf * 2.0 * (k1 + 1.0) / (2.0 + k1 * (1.0 - b + b * 3.0 / 2.0));
        let d1 = idf * 1.0 * (k1 + 1.0) / (1.0 + k1 * (1.0 - b + b * 1.0 / 2.0));
        assert!((s[0] - d0).abs() < 1e-9, "{} vs {}", s[0], d0);
        assert!((s[1] - d1).abs() < 1e-9);
        assert_eq!(s[2], 0.0);
    }

    #[test]
    fn award_triples_rank_first_on_toy_corpus() {
        let g = turing_toy_graph();
        let all: Vec<Candidate> = g.triples().iter().map(|&t| Candidate::triple(&g, t)).collect();
        let s = Bm25Scorer::default()
            .score_batch(&QueryContext::new("Turing Award"), &all)
            .unwrap()
            .into_vec();
        let award_rel = g.relation_id("awarded").unwrap();
        for (c, &v) in all.iter().zip(&s) {
            let Payload::Triple(t) = c.payload else { unreachable!() };
            assert_eq!(v > 0.0, t.relation == award_rel, "{}", c.text);
        }
        // With exactly two award triples in the corpus they take the two top slots.
        let texts = [
            "PostgreSQL, was created, Michael Stonebraker",
            "Michael Stonebraker, awarded, ACM Turing Award",
            "Relational Model, was developed, Edgar F. Codd",
            "Edgar F. Codd, awarded, ACM Turing Award",
        ];
        let s = score("Turing Award", &texts);
        let top = crate::scoring::top_k_indices(&s, 2, |i| i);
        assert_eq!(top, vec![1, 3]);
    }

    #[test]
    fn self_match_dominates_unrelated() {
        let s = score("Edgar F. Codd", &["Edgar F. Codd", "Transaction Processing"]);
        assert!(s[0] >= s[1]);
    }
}
