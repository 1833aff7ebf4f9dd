//! Pluggable content-similarity scorers.

use std::collections::HashMap;
use std::time::Duration;

use reqwest::blocking::Client;
use serde_json::{json, Value};
use thiserror::Error;

use crate::lang::{units, Language};

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("embedding endpoint: {0}")]
    Endpoint(String),
    #[error("unknown scorer '{0}' (expected token-f1, exact or embedding)")]
    Unknown(String),
}

/// `score(x, x)` is the scorer's maximum for any non-empty `x`.
pub trait SimilarityScorer: Send + Sync {
    fn name(&self) -> &str;
    fn score(&self, candidate: &str, reference: &str) -> Result<f64, ScorerError>;
}

/// Multiset unit overlap F1 in `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct TokenF1Scorer {
    pub language: Language,
}

impl TokenF1Scorer {
    pub fn new(language: Language) -> Self {
        Self { language }
    }
}

impl SimilarityScorer for TokenF1Scorer {
    fn name(&self) -> &str {
        "token-f1"
    }

    fn score(&self, candidate: &str, reference: &str) -> Result<f64, ScorerError> {
        let unit = self.language.default_unit();
        let c = units(candidate, unit);
        let r = units(reference, unit);
        if c.is_empty() || r.is_empty() {
            return Ok(0.0);
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for t in &r {
            *counts.entry(t).or_default() += 1;
        }
        let mut common = 0usize;
        for t in &c {
            if let Some(n) = counts.get_mut(t) {
                if *n > 0 {
                    *n -= 1;
                    common += 1;
                }
            }
        }
        if common == 0 {
            return Ok(0.0);
        }
        let p = common as f64 / c.len() as f64;
        let rec = common as f64 / r.len() as f64;
        Ok(2.0 * p * rec / (p + rec))
    }
}

/// 1 for identical (trimmed) texts, else 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatchScorer;

impl SimilarityScorer for ExactMatchScorer {
    fn name(&self) -> &str {
        "exact"
    }

    fn score(&self, candidate: &str, reference: &str) -> Result<f64, ScorerError> {
        let (c, r) = (candidate.trim(), reference.trim());
        Ok(if !c.is_empty() && c == r { 1.0 } else { 0.0 })
    }
}

/// Cosine similarity of embeddings from an `/embeddings` endpoint.
pub struct EmbeddingScorer {
    endpoint: String,
    api_key: Option<String>,
    model: String,
    http: Client,
}

impl EmbeddingScorer {
    pub fn new(api_base: &str, api_key: Option<String>, model: impl Into<String>) -> Result<Self, ScorerError> {
        let http = Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| ScorerError::Endpoint(e.to_string()))?;
        Ok(Self {
            endpoint: format!("{}/embeddings", api_base.trim_end_matches('/')),
            api_key,
            model: model.into(),
            http,
        })
    }

    fn embed(&self, texts: [&str; 2]) -> Result<[Vec<f64>; 2], ScorerError> {
        let mut req = self
            .http
            .post(&self.endpoint)
            .json(&json!({ "model": self.model, "input": texts }));
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| ScorerError::Endpoint(e.to_string()))?;
        let status = resp.status();
        let body = resp.text().map_err(|e| ScorerError::Endpoint(e.to_string()))?;
        if !status.is_success() {
            return Err(ScorerError::Endpoint(format!("HTTP {status}")));
        }
        let v: Value = serde_json::from_str(&body).map_err(|e| ScorerError::Endpoint(e.to_string()))?;
        let vector = |i: usize| -> Result<Vec<f64>, ScorerError> {
            v["data"][i]["embedding"]
                .as_array()
                .ok_or_else(|| ScorerError::Endpoint(format!("missing data[{i}].embedding")))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| ScorerError::Endpoint("non-numeric embedding".into())))
                .collect()
        };
        Ok([vector(0)?, vector(1)?])
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

impl SimilarityScorer for EmbeddingScorer {
    fn name(&self) -> &str {
        "embedding"
    }

    fn score(&self, candidate: &str, reference: &str) -> Result<f64, ScorerError> {
        if candidate.trim().is_empty() || reference.trim().is_empty() {
            return Ok(0.0);
        }
        let [a, b] = self.embed([candidate, reference])?;
        Ok(cosine(&a, &b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_http::serve;

    #[test]
    fn token_f1() {
        let s = TokenF1Scorer::new(Language::En);
        assert_eq!(s.score("red car leads", "red car leads").unwrap(), 1.0);
        assert_eq!(s.score("a b", "c d").unwrap(), 0.0);
        assert_eq!(s.score("", "c d").unwrap(), 0.0);
        // common = {a, b}: P = 2/3, R = 2/2
        assert!((s.score("a b c", "a b").unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn exact() {
        assert_eq!(ExactMatchScorer.score(" x ", "x").unwrap(), 1.0);
        assert_eq!(ExactMatchScorer.score("x", "y").unwrap(), 0.0);
        assert_eq!(ExactMatchScorer.score("", "").unwrap(), 0.0);
    }

    #[test]
    fn embedding_cosine() {
        let body = json!({"data":[{"embedding":[1.0,0.0]},{"embedding":[1.0,1.0]}]}).to_string();
        let (base, rx) = serve(vec![(200, body)]);
        let s = EmbeddingScorer::new(&base, None, "emb").unwrap();
        let v = s.score("a", "b").unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let sent: Value = serde_json::from_str(&rx.recv().unwrap()).unwrap();
        assert_eq!(sent["input"], json!(["a", "b"]));
        let (base, _rx) = serve(vec![(500, "{}".into())]);
        assert!(EmbeddingScorer::new(&base, None, "emb").unwrap().score("a", "b").is_err());
    }
}
