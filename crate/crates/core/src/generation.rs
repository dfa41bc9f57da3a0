//! Answer generation from refined reasoning paths.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::kg::{Graph, Query};
use crate::metrics::SetMetrics;
use crate::path::PathSet;
use crate::prompts::PromptTemplate;
use crate::scoring::remote::{truncate_at_stop, ChatClient, JsonClient};
use crate::scoring::{render_path, STUB_ENDPOINT};

pub const LLM_TOKEN_ENV: &str = "LEGO_LLM_TOKEN";

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid generation config: {0}")]
    Config(String),
    #[error("completion request failed: {0}")]
    Transport(String),
}

fn default_temperature() -> f64 {
    0.01
}
fn default_max_tokens() -> u32 {
    256
}
fn default_stop() -> Vec<String> {
    vec!["<|eot_id|>".to_owned()]
}
fn default_max_in_flight() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationParams {
    /// Chat-completion URL, or `stub` for an offline canned answer.
    pub endpoint: String,
    #[serde(default)]
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_stop")]
    pub stop: Vec<String>,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    /// Completion returned in stub mode before stop truncation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stub_completion: Option<String>,
}

impl GenerationParams {
    pub fn new(endpoint: &str, model: &str) -> Self {
        Self {
            endpoint: endpoint.to_owned(),
            model: model.to_owned(),
            temperature: default_temperature(),
            max_tokens: default_max_tokens(),
            stop: default_stop(),
            max_in_flight: default_max_in_flight(),
            stub_completion: None,
        }
    }

    pub fn stub(completion: &str) -> Self {
        Self {
            stub_completion: Some(completion.to_owned()),
            ..Self::new(STUB_ENDPOINT, "stub")
        }
    }

    pub fn is_stub(&self) -> bool {
        self.endpoint == STUB_ENDPOINT
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GenerationError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| GenerationError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let params: Self = serde_yaml::from_str(&text).map_err(|e| GenerationError::Config(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        if self.endpoint.is_empty() {
            return Err(GenerationError::Config("endpoint must not be empty".into()));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(GenerationError::Config("temperature must be a non-negative number".into()));
        }
        if self.max_tokens == 0 || self.max_in_flight == 0 {
            return Err(GenerationError::Config("max_tokens and max_in_flight must be positive".into()));
        }
        Ok(())
    }
}

pub fn build_prompt(query: &Query, paths: &PathSet, template: PromptTemplate, graph: &Graph) -> String {
    let lines: Vec<String> = paths.iter().map(|p| render_path(p, graph)).collect();
    template.render(&lines, &query.text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub latency_s: f64,
}

/// Issues chat completions, or answers from the canned text in stub mode.
#[derive(Debug, Clone)]
pub struct Generator {
    params: GenerationParams,
    chat: Option<ChatClient>,
}

impl Generator {
    pub fn new(params: GenerationParams) -> Result<Self, GenerationError> {
        params.validate()?;
        let chat = (!params.is_stub()).then(|| {
            let client = JsonClient::from_env(&params.endpoint, LLM_TOKEN_ENV, params.max_in_flight);
            ChatClient::new(client, params.model.clone())
        });
        Ok(Self { params, chat })
    }

    pub fn params(&self) -> &GenerationParams {
        &self.params
    }

    pub fn generate(&self, prompt: &str) -> Result<Completion, GenerationError> {
        let started = Instant::now();
        let p = &self.params;
        let text = match &self.chat {
            None => truncate_at_stop(p.stub_completion.as_deref().unwrap_or(""), &p.stop).to_owned(),
            Some(chat) => chat
                .complete(prompt, p.temperature, p.max_tokens, &p.stop)
                .map_err(GenerationError::Transport)?,
        };
        Ok(Completion {
            text,
            latency_s: started.elapsed().as_secs_f64(),
        })
    }
}

/// Containment scoring of a free-text answer against answer labels.
/// Precision counts only the distinct answer labels that were found.
pub fn score_answer_labels(completion: &str, answers: &[String]) -> (bool, f64) {
    let haystack = completion.to_lowercase();
    let truth: BTreeSet<String> = answers.iter().map(|a| a.to_lowercase()).collect();
    let found = truth.iter().filter(|a| haystack.contains(a.as_str())).count();
    if found == 0 {
        return (false, 0.0);
    }
    let m = SetMetrics::from_pr(1.0, found as f64 / truth.len() as f64);
    (true, m.f1)
}

pub fn score_answer(completion: &str, query: &Query, graph: &Graph) -> (bool, f64) {
    let labels: Vec<String> = query
        .answers
        .iter()
        .map(|&a| graph.entity_label(a).to_owned())
        .collect();
    score_answer_labels(completion, &labels)
}

/// The retrieval output one generation call needs.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationInput {
    pub query_id: String,
    pub question: String,
    pub answers: Vec<String>,
    pub paths: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub query_id: String,
    #[serde(skip)]
    pub prompt: String,
    pub prompt_sha256: String,
    pub completion: String,
    pub hit_at_1: bool,
    pub f1: f64,
    pub latency_s: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub empty_completion: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn generate_one(generator: &Generator, template: PromptTemplate, input: &GenerationInput) -> GenerationResult {
    let prompt = template.render(&input.paths, &input.question);
    let mut result = GenerationResult {
        query_id: input.query_id.clone(),
        prompt_sha256: sha256_hex(&prompt),
        prompt,
        completion: String::new(),
        hit_at_1: false,
        f1: 0.0,
        latency_s: 0.0,
        empty_completion: false,
        error: None,
    };
    match generator.generate(&result.prompt) {
        Ok(c) => {
            let (hit, f1) = score_answer_labels(&c.text, &input.answers);
            result.empty_completion = c.text.trim().is_empty();
            result.completion = c.text;
            result.latency_s = c.latency_s;
            result.hit_at_1 = hit;
            result.f1 = f1;
        }
        Err(e) => {
            log::warn!("query {}: {e}", input.query_id);
            result.error = Some(e.to_string());
        }
    }
    result
}

/// Generates for every input concurrently; failures are recorded per query.
/// Results come back sorted by query id.
pub fn generate_all(generator: &Generator, template: PromptTemplate, inputs: &[GenerationInput]) -> Vec<GenerationResult> {
    let mut out: Vec<GenerationResult> = inputs
        .par_iter()
        .map(|input| generate_one(generator, template, input))
        .collect();
    out.sort_by(|a, b| a.query_id.cmp(&b.query_id));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::turing_toy_graph;
    use crate::prompts::Shots;

    #[test]
    fn defaults() {
        let p = GenerationParams::new("http://x", "m");
        assert_eq!(p.temperature, 0.01);
        assert_eq!(p.max_tokens, 256);
        assert_eq!(p.stop, vec!["<|eot_id|>".to_string()]);
        assert_eq!(p.max_in_flight, 4);
        let from_yaml: GenerationParams = serde_yaml::from_str("endpoint: http://x\nmodel: m\n").unwrap();
        assert_eq!(from_yaml, p);
        assert!(serde_yaml::from_str::<GenerationParams>("endpoint: x\ntemp: 1\n").is_err());
    }

    #[test]
    fn stub_generation_truncates_at_stop() {
        let g = Generator::new(GenerationParams::stub("Edgar F. Codd<|eot_id|>ignored")).unwrap();
        let c = g.generate("prompt").unwrap();
        assert_eq!(c.text, "Edgar F. Codd");
        assert!(c.latency_s >= 0.0);
    }

    #[test]
    fn answer_scoring() {
        let g = turing_toy_graph();
        let q = Query {
            id: "q".into(),
            text: String::new(),
            topic_entities: BTreeSet::new(),
            answers: [g.entity_id("Edgar F. Codd").unwrap()].into(),
        };
        assert_eq!(score_answer("Edgar F. Codd received the award", &q, &g), (true, 1.0));
        assert_eq!(score_answer("  EDGAR f. codd  ", &q, &g), (true, 1.0));
        assert_eq!(score_answer("nobody", &q, &g), (false, 0.0));
        let (hit, f1) = score_answer_labels("only a here", &["a".into(), "b".into()]);
        assert!(hit);
        assert!((f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_paths_prompt() {
        let g = turing_toy_graph();
        let q = Query {
            id: "q".into(),
            text: "Who?".into(),
            topic_entities: BTreeSet::new(),
            answers: BTreeSet::new(),
        };
        let p = build_prompt(&q, &PathSet::default(), PromptTemplate::new(Shots::ZeroShot), &g);
        assert!(p.ends_with("Reasoning Paths:\n\n\n\nQuestion:\n\nWho?\n"));
    }

    #[test]
    fn generate_all_sorts_and_flags() {
        let gen = Generator::new(GenerationParams::stub("")).unwrap();
        let input = |id: &str| GenerationInput {
            query_id: id.into(),
            question: "q".into(),
            answers: vec!["x".into()],
            paths: vec![],
        };
        let out = generate_all(&gen, PromptTemplate::new(Shots::ZeroShot), &[input("b"), input("a")]);
        assert_eq!(out[0].query_id, "a");
        assert!(out.iter().all(|r| r.empty_completion && !r.hit_at_1));
        assert_eq!(out[0].prompt_sha256, sha256_hex(&out[0].prompt));
    }
}
