//! HTTP clients for model-backed scorers.
//!
//! Wire formats:
//! - embedding: `{"model", "input": [texts]}` -> `{"data": [{"embedding": [..]}, ..]}`
//! - rerank: `{"model", "query", "documents": [texts]}` -> `{"results": [{"index", "relevance_score"}, ..]}`
//! - chat: `{"model", "messages", "temperature", "max_tokens", "stop"}` -> `choices[0].message.content`

use std::collections::HashMap;
use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use super::{cosine_similarity, Candidate, QueryContext, ScoreError, ScoreVector, Scorer, ScorerConfig};
use crate::prompts;

pub const SCORER_TOKEN_ENV: &str = "LEGO_SCORER_TOKEN";

const ATTEMPTS: u32 = 3;
const BACKOFF: Duration = Duration::from_millis(100);

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
struct Limiter {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Limiter);

impl Limiter {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

/// JSON-over-HTTP POST client with bearer auth, bounded concurrency and
/// exponential-backoff retries.
#[derive(Debug, Clone)]
pub struct JsonClient {
    agent: ureq::Agent,
    endpoint: String,
    token: Option<String>,
    limiter: Arc<Limiter>,
}

impl JsonClient {
    pub fn new(endpoint: &str, token: Option<String>, max_in_flight: usize) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Self {
            agent,
            endpoint: endpoint.to_owned(),
            token: token.filter(|t| !t.is_empty()),
            limiter: Arc::new(Limiter::new(max_in_flight)),
        }
    }

    /// Reads the bearer token from `env_var` when set.
    pub fn from_env(endpoint: &str, env_var: &str, max_in_flight: usize) -> Self {
        Self::new(endpoint, std::env::var(env_var).ok(), max_in_flight)
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn post(&self, body: &Value) -> Result<Value, String> {
        let _permit = self.limiter.acquire();
        let mut last = String::new();
        for attempt in 0..ATTEMPTS {
            if attempt > 0 {
                thread::sleep(BACKOFF * 2u32.pow(attempt - 1));
            }
            let mut req = self.agent.post(&self.endpoint);
            if let Some(token) = &self.token {
                req = req.header("Authorization", &format!("Bearer {token}"));
            }
            match req.send_json(body) {
                Ok(mut resp) => match resp.body_mut().read_json::<Value>() {
                    Ok(v) => return Ok(v),
                    Err(e) => last = format!("invalid JSON response: {e}"),
                },
                Err(e) => last = e.to_string(),
            }
            log::debug!("POST {} attempt {} failed: {last}", self.endpoint, attempt + 1);
        }
        Err(format!("{} after {ATTEMPTS} attempts: {last}", self.endpoint))
    }
}

fn finite_f64(v: &Value) -> Result<f64, ScoreError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ScoreError::Protocol(format!("expected a finite number, got {v}")))
}

fn chunks(len: usize, size: usize) -> impl Iterator<Item = Range<usize>> {
    (0..len).step_by(size.max(1)).map(move |s| s..(s + size).min(len))
}

fn endpoint_of(config: &ScorerConfig) -> Result<&str, ScoreError> {
    config
        .endpoint
        .as_deref()
        .ok_or_else(|| ScoreError::Config(format!("{} scorer requires an endpoint", config.kind)))
}

/// Cosine similarity of embeddings, cached by exact text for the scorer's lifetime.
#[derive(Debug)]
pub struct EmbeddingScorer {
    client: JsonClient,
    model: String,
    batch_size: usize,
    cache: Mutex<HashMap<String, Arc<Vec<f64>>>>,
}

impl EmbeddingScorer {
    pub fn from_config(config: &ScorerConfig) -> Result<Self, ScoreError> {
        Ok(Self {
            client: JsonClient::from_env(endpoint_of(config)?, SCORER_TOKEN_ENV, config.max_in_flight),
            model: config.model.clone().unwrap_or_default(),
            batch_size: config.batch_size,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    fn embed_missing(&self, texts: &[(&str, usize)]) -> Result<(), ScoreError> {
        for range in chunks(texts.len(), self.batch_size) {
            let batch = &texts[range.clone()];
            let input: Vec<&str> = batch.iter().map(|(t, _)| *t).collect();
            let candidate_range = batch[0].1..batch[batch.len() - 1].1 + 1;
            let resp = self
                .client
                .post(&json!({ "model": self.model, "input": input }))
                .map_err(|message| ScoreError::Transport {
                    range: candidate_range,
                    message,
                })?;
            let data = resp
                .get("data")
                .and_then(Value::as_array)
                .ok_or_else(|| ScoreError::Protocol("embedding response lacks `data`".into()))?;
            if data.len() != batch.len() {
                return Err(ScoreError::Protocol(format!(
                    "embedding response has {} vectors for {} inputs",
                    data.len(),
                    batch.len()
                )));
            }
            let mut cache = self.cache.lock().unwrap();
            for ((text, _), item) in batch.iter().zip(data) {
                let vector = item
                    .get("embedding")
                    .and_then(Value::as_array)
                    .ok_or_else(|| ScoreError::Protocol("embedding item lacks `embedding`".into()))?
                    .iter()
                    .map(finite_f64)
                    .collect::<Result<Vec<f64>, _>>()?;
                cache.insert((*text).to_owned(), Arc::new(vector));
            }
        }
        Ok(())
    }
}

impl Scorer for EmbeddingScorer {
    fn score_batch(&self, query: &QueryContext, candidates: &[Candidate]) -> Result<ScoreVector, ScoreError> {
        // (text, first candidate index using it); the query maps to index 0
        let mut missing: Vec<(&str, usize)> = Vec::new();
        {
            let cache = self.cache.lock().unwrap();
            let mut seen = std::collections::HashSet::new();
            let texts = std::iter::once((query.text.as_str(), 0))
                .chain(candidates.iter().enumerate().map(|(i, c)| (c.text.as_str(), i)));
            for (text, idx) in texts {
                if !cache.contains_key(text) && seen.insert(text) {
                    missing.push((text, idx));
                }
            }
        }
        self.embed_missing(&missing)?;
        let cache = self.cache.lock().unwrap();
        let q = Arc::clone(&cache[query.text.as_str()]);
        let mut scores = Vec::with_capacity(candidates.len());
        for c in candidates {
            let v = &cache[c.text.as_str()];
            if v.len() != q.len() {
                return Err(ScoreError::Protocol(format!(
                    "embedding dimension mismatch: {} vs {}",
                    v.len(),
                    q.len()
                )));
            }
            scores.push(cosine_similarity(&q, v));
        }
        ScoreVector::new(scores, candidates.len())
    }
}

/// Cross-encoder relevance scores from a rerank endpoint.
#[derive(Debug)]
pub struct RerankScorer {
    client: JsonClient,
    model: String,
    batch_size: usize,
}

impl RerankScorer {
    pub fn from_config(config: &ScorerConfig) -> Result<Self, ScoreError> {
        Ok(Self {
            client: JsonClient::from_env(endpoint_of(config)?, SCORER_TOKEN_ENV, config.max_in_flight),
            model: config.model.clone().unwrap_or_default(),
            batch_size: config.batch_size,
        })
    }
}

impl Scorer for RerankScorer {
    fn score_batch(&self, query: &QueryContext, candidates: &[Candidate]) -> Result<ScoreVector, ScoreError> {
        let mut scores = vec![f64::NAN; candidates.len()];
        for range in chunks(candidates.len(), self.batch_size) {
            let documents: Vec<&str> = candidates[range.clone()].iter().map(|c| c.text.as_str()).collect();
            let body = json!({ "model": self.model, "query": query.text, "documents": documents });
            let resp = self.client.post(&body).map_err(|message| ScoreError::Transport {
                range: range.clone(),
                message,
            })?;
            let results = resp
                .get("results")
                .and_then(Value::as_array)
                .ok_or_else(|| ScoreError::Protocol("rerank response lacks `results`".into()))?;
            if results.len() != documents.len() {
                return Err(ScoreError::Protocol(format!(
                    "rerank response has {} results for {} documents",
                    results.len(),
                    documents.len()
                )));
            }
            for r in results {
                let index = r
                    .get("index")
                    .and_then(Value::as_u64)
                    .map(|i| i as usize)
                    .filter(|&i| i < documents.len())
                    .ok_or_else(|| ScoreError::Protocol(format!("bad rerank index in {r}")))?;
                let slot = &mut scores[range.start + index];
                if !slot.is_nan() {
                    return Err(ScoreError::Protocol(format!("duplicate rerank index {index}")));
                }
                *slot = finite_f64(r.get("relevance_score").unwrap_or(&Value::Null))?;
            }
        }
        ScoreVector::new(scores, candidates.len())
    }
}

/// Minimal chat-completion client.
#[derive(Debug, Clone)]
pub struct ChatClient {
    client: JsonClient,
    model: String,
}

impl ChatClient {
    pub fn new(client: JsonClient, model: impl Into<String>) -> Self {
        Self {
            client,
            model: model.into(),
        }
    }

    /// Sends one user message and returns the first choice's content,
    /// cut at the first stop sequence.
    pub fn complete(&self, prompt: &str, temperature: f64, max_tokens: u32, stop: &[String]) -> Result<String, String> {
        let body = json!({
            "model": self.model,
            "messages": [{ "role": "user", "content": prompt }],
            "temperature": temperature,
            "max_tokens": max_tokens,
            "stop": stop,
        });
        let resp = self.client.post(&body)?;
        let content = resp
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| format!("chat response lacks choices[0].message.content: {resp}"))?;
        Ok(truncate_at_stop(content, stop).to_owned())
    }
}

pub fn truncate_at_stop<'a>(text: &'a str, stop: &[String]) -> &'a str {
    let cut = stop
        .iter()
        .filter(|s| !s.is_empty())
        .filter_map(|s| text.find(s.as_str()))
        .min()
        .unwrap_or(text.len());
    &text[..cut]
}

/// Parses the comma-separated list following `Score:` (or the first line when
/// no marker is present). Needs exactly `expected` finite values.
pub fn parse_score_list(response: &str, expected: usize) -> Option<Vec<f64>> {
    let line = match response.rfind("Score:") {
        Some(pos) => response[pos + "Score:".len()..].lines().next().unwrap_or(""),
        None => response.trim().lines().next().unwrap_or(""),
    };
    let values: Vec<f64> = line
        .split([',', ';'])
        .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<_>>()?;
    (values.len() == expected).then_some(values)
}

/// Prompts an LLM for a score list; malformed answers get one retry and then
/// fall back to uniform scores, counted in [`Scorer::failures`].
#[derive(Debug)]
pub struct LlmScorer {
    chat: ChatClient,
    batch_size: usize,
    failures: AtomicU64,
}

impl LlmScorer {
    pub fn from_config(config: &ScorerConfig) -> Result<Self, ScoreError> {
        let client = JsonClient::from_env(endpoint_of(config)?, SCORER_TOKEN_ENV, config.max_in_flight);
        Ok(Self {
            chat: ChatClient::new(client, config.model.clone().unwrap_or_default()),
            batch_size: config.batch_size,
            failures: AtomicU64::new(0),
        })
    }
}

impl Scorer for LlmScorer {
    fn score_batch(&self, query: &QueryContext, candidates: &[Candidate]) -> Result<ScoreVector, ScoreError> {
        let mut scores = Vec::with_capacity(candidates.len());
        for range in chunks(candidates.len(), self.batch_size) {
            let texts: Vec<&str> = candidates[range.clone()].iter().map(|c| c.text.as_str()).collect();
            let prompt = prompts::score_prompt(&query.text, &query.topic_labels.join("; "), &texts);
            let mut parsed = None;
            for _ in 0..2 {
                let reply = self
                    .chat
                    .complete(&prompt, 0.0, 256, &[])
                    .map_err(|message| ScoreError::Transport {
                        range: range.clone(),
                        message,
                    })?;
                parsed = parse_score_list(&reply, texts.len());
                if parsed.is_some() {
                    break;
                }
            }
            match parsed {
                Some(v) => scores.extend(v),
                None => {
                    self.failures.fetch_add(1, Ordering::Relaxed);
                    scores.extend(std::iter::repeat_n(1.0 / texts.len() as f64, texts.len()));
                }
            }
        }
        ScoreVector::new(scores, candidates.len())
    }

    fn failures(&self) -> u64 {
        self.failures.load(Ordering::Relaxed)
    }
}
