//! Pluggable toxicity scoring.
//!
//! The reference scorer is a weighted lexicon: the sum of matched token
//! weights, capped at 1. It is deliberately simple and labeled as
//! lower-fidelity; the HTTP adapter lets a real classifier endpoint stand in
//! wherever higher fidelity is needed.

use std::collections::HashMap;

use serde::Deserialize;
use thiserror::Error;

use crate::textfeat::tokenize::tokenize;

#[derive(Debug, Error)]
pub enum ToxicityError {
    #[error("toxicity endpoint {url} failed: {message}")]
    Endpoint { url: String, message: String },
    #[error("toxicity endpoint {url} returned {got} scores for {expected} texts")]
    CountMismatch {
        url: String,
        expected: usize,
        got: usize,
    },
}

pub trait ToxicityScorer: Send + Sync {
    fn name(&self) -> &str;
    /// Score in [0, 1]; deterministic for a fixed scorer and text.
    fn score(&self, text: &str) -> Result<f64, ToxicityError>;
}

/// Weighted-lexicon fallback scorer: capped sum of matched token weights.
#[derive(Debug, Clone)]
pub struct LexiconToxicity {
    weights: HashMap<String, f64>,
}

impl LexiconToxicity {
    pub fn new(weights: HashMap<String, f64>) -> Self {
        LexiconToxicity { weights }
    }

    pub fn builtin() -> Self {
        LexiconToxicity::new(crate::textfeat::lexicon::LexiconSet::builtin().toxicity.clone())
    }
}

impl ToxicityScorer for LexiconToxicity {
    fn name(&self) -> &str {
        "lexicon-fallback"
    }

    fn score(&self, text: &str) -> Result<f64, ToxicityError> {
        let sum: f64 = tokenize(text)
            .words
            .iter()
            .filter_map(|w| self.weights.get(w.as_str()))
            .sum();
        Ok(sum.min(1.0))
    }
}

/// Adapter for an external toxicity classifier.
///
/// Wire format: `POST <url>` with `{"texts": ["..."]}`, response
/// `{"scores": [0.0..1.0]}`.
pub struct HttpToxicity {
    url: String,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct ScoreResponse {
    scores: Vec<f64>,
}

impl HttpToxicity {
    pub fn new(url: String) -> Self {
        HttpToxicity {
            url,
            client: reqwest::blocking::Client::new(),
        }
    }
}

impl ToxicityScorer for HttpToxicity {
    fn name(&self) -> &str {
        "http-endpoint"
    }

    fn score(&self, text: &str) -> Result<f64, ToxicityError> {
        let body = serde_json::json!({ "texts": [text] });
        let resp = self
            .client
            .post(&self.url)
            .json(&body)
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| ToxicityError::Endpoint {
                url: self.url.clone(),
                message: e.to_string(),
            })?;
        let parsed: ScoreResponse = resp.json().map_err(|e| ToxicityError::Endpoint {
            url: self.url.clone(),
            message: e.to_string(),
        })?;
        if parsed.scores.len() != 1 {
            return Err(ToxicityError::CountMismatch {
                url: self.url.clone(),
                expected: 1,
                got: parsed.scores.len(),
            });
        }
        Ok(parsed.scores[0].clamp(0.0, 1.0))
    }
}
