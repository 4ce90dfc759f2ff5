//! Text encoders behind one trait: a hashed character/word n-gram fallback
//! that needs no model artifacts, an HTTP adapter for a real sentence
//! encoder, and a local word-vector-table backend.
//!
//! HTTP wire format: `POST <url>` with `{"texts": ["..."]}`, response
//! `{"vectors": [[...]]}`. Every returned vector must have the handle's
//! declared dimension.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::rng::{hash_str, Rng};

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("encoder {name} backend unavailable: {message}")]
    BackendUnavailable { name: String, message: String },
    #[error("encoder {name} returned a {got}-dim vector, expected {expected}")]
    DimensionMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("encoder {name} returned {got} vectors for {expected} texts")]
    CountMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid encoder spec {spec:?}: {message}")]
    BadSpec { spec: String, message: String },
}

pub trait Encoder: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    /// Embed a batch; one finite vector of `dimension()` per input text,
    /// deterministic per encoder.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EncoderError>;
    /// Whether concurrent `embed_batch` calls are safe to fan out.
    fn concurrent_safe(&self) -> bool {
        true
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EncoderError> {
        Ok(self
            .embed_batch(std::slice::from_ref(&text.to_string()))?
            .pop()
            .expect("embed_batch returns one vector per text"))
    }
}

/// Declarative encoder configuration; `build` turns it into a live encoder.
#[derive(Debug, Clone, PartialEq)]
pub enum EncoderHandle {
    HttpEndpoint { url: String, dimension: usize },
    LocalModel { path: PathBuf },
    HashedFallback { dimension: usize, seed: u64 },
}

impl EncoderHandle {
    pub const DEFAULT_HASHED_DIM: usize = 256;
    pub const DEFAULT_HASHED_SEED: u64 = 0x5EED;

    /// Parse a CLI/config encoder spec:
    /// `fallback`, `fallback:dim=128,seed=7`, `https://host/embed#dim=384`,
    /// or `file:vectors.json`.
    pub fn parse(spec: &str) -> Result<Self, EncoderError> {
        if spec == "fallback" {
            return Ok(EncoderHandle::HashedFallback {
                dimension: Self::DEFAULT_HASHED_DIM,
                seed: Self::DEFAULT_HASHED_SEED,
            });
        }
        if let Some(args) = spec.strip_prefix("fallback:") {
            let mut dimension = Self::DEFAULT_HASHED_DIM;
            let mut seed = Self::DEFAULT_HASHED_SEED;
            for kv in args.split(',') {
                match kv.split_once('=') {
                    Some(("dim", v)) => {
                        dimension = v.parse().map_err(|e| EncoderError::BadSpec {
                            spec: spec.to_string(),
                            message: format!("bad dim: {e}"),
                        })?
                    }
                    Some(("seed", v)) => {
                        seed = v.parse().map_err(|e| EncoderError::BadSpec {
                            spec: spec.to_string(),
                            message: format!("bad seed: {e}"),
                        })?
                    }
                    _ => {
                        return Err(EncoderError::BadSpec {
                            spec: spec.to_string(),
                            message: format!("unknown option {kv:?}"),
                        })
                    }
                }
            }
            return Ok(EncoderHandle::HashedFallback { dimension, seed });
        }
        if let Some(path) = spec.strip_prefix("file:") {
            return Ok(EncoderHandle::LocalModel {
                path: PathBuf::from(path),
            });
        }
        if spec.starts_with("http://") || spec.starts_with("https://") {
            let (url, dim) = match spec.split_once('#') {
                Some((url, frag)) => {
                    let dim = frag
                        .strip_prefix("dim=")
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| EncoderError::BadSpec {
                            spec: spec.to_string(),
                            message: "expected #dim=<n> fragment".to_string(),
                        })?;
                    (url.to_string(), dim)
                }
                None => {
                    return Err(EncoderError::BadSpec {
                        spec: spec.to_string(),
                        message: "http encoder spec needs a #dim=<n> fragment".to_string(),
                    })
                }
            };
            return Ok(EncoderHandle::HttpEndpoint {
                url,
                dimension: dim,
            });
        }
        Err(EncoderError::BadSpec {
            spec: spec.to_string(),
            message: "expected fallback[:opts], http(s) url#dim=<n>, or file:<path>".to_string(),
        })
    }

    pub fn build(&self) -> Result<Arc<dyn Encoder>, EncoderError> {
        match self {
            EncoderHandle::HashedFallback { dimension, seed } => {
                Ok(Arc::new(HashedEncoder::new(*dimension, *seed)))
            }
            EncoderHandle::HttpEndpoint { url, dimension } => {
                Ok(Arc::new(HttpEncoder::new(url.clone(), *dimension)))
            }
            EncoderHandle::LocalModel { path } => {
                Ok(Arc::new(WordVectorEncoder::load(path)?))
            }
        }
    }
}

/// Character/word n-gram feature hashing into a fixed dimension.
///
/// Needs no artifacts or network, so the whole test suite runs offline.
/// Word tokens weigh 1.0 and boundary-padded character trigrams 0.5; the
/// result is L2-normalized. The empty string embeds to the zero vector.
pub struct HashedEncoder {
    dimension: usize,
    seed: u64,
    name: String,
}

impl HashedEncoder {
    pub fn new(dimension: usize, seed: u64) -> Self {
        assert!(dimension > 0, "encoder dimension must be positive");
        HashedEncoder {
            dimension,
            seed,
            name: format!("hashed-{dimension}d"),
        }
    }

    fn bucket(&self, feature: &str) -> usize {
        let h = Rng::new(self.seed ^ hash_str(feature)).next_u64();
        (h % self.dimension as u64) as usize
    }

    fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0f64; self.dimension];
        let norm = text.trim().to_lowercase();
        for token in norm.split_whitespace() {
            v[self.bucket(&format!("w:{token}"))] += 1.0;
            let padded: Vec<char> = std::iter::once('#')
                .chain(token.chars())
                .chain(std::iter::once('#'))
                .collect();
            for win in padded.windows(3) {
                let gram: String = win.iter().collect();
                v[self.bucket(&format!("c:{gram}"))] += 0.5;
            }
        }
        let norm2 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm2 > 0.0 {
            for x in &mut v {
                *x /= norm2;
            }
        }
        v
    }
}

impl Encoder for HashedEncoder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EncoderError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// Remote encoder endpoint adapter.
pub struct HttpEncoder {
    url: String,
    dimension: usize,
    name: String,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

impl HttpEncoder {
    pub fn new(url: String, dimension: usize) -> Self {
        let name = format!("http:{url}");
        HttpEncoder {
            url,
            dimension,
            name,
            client: reqwest::blocking::Client::new(),
        }
    }
}

impl Encoder for HttpEncoder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EncoderError> {
        let body = serde_json::json!({ "texts": texts });
        let resp = self
            .client
            .post(&self.url)
            .json(&body)
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| EncoderError::BackendUnavailable {
                name: self.name.clone(),
                message: e.to_string(),
            })?;
        let parsed: EmbedResponse =
            resp.json().map_err(|e| EncoderError::BackendUnavailable {
                name: self.name.clone(),
                message: format!("bad response body: {e}"),
            })?;
        if parsed.vectors.len() != texts.len() {
            return Err(EncoderError::CountMismatch {
                name: self.name.clone(),
                expected: texts.len(),
                got: parsed.vectors.len(),
            });
        }
        for v in &parsed.vectors {
            if v.len() != self.dimension {
                return Err(EncoderError::DimensionMismatch {
                    name: self.name.clone(),
                    expected: self.dimension,
                    got: v.len(),
                });
            }
        }
        Ok(parsed.vectors)
    }
}

/// Local word-vector table: mean of per-token vectors, zero vector when no
/// token is known.
///
/// File format: JSON `{"dimension": d, "vectors": {"word": [f64; d]}}`.
pub struct WordVectorEncoder {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
    name: String,
}

#[derive(Deserialize)]
struct WordVectorFile {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl WordVectorEncoder {
    pub fn load(path: &Path) -> Result<Self, EncoderError> {
        let name = format!("local:{}", path.display());
        let content =
            std::fs::read_to_string(path).map_err(|e| EncoderError::BackendUnavailable {
                name: name.clone(),
                message: format!("model artifact missing: {e}"),
            })?;
        let parsed: WordVectorFile =
            serde_json::from_str(&content).map_err(|e| EncoderError::BackendUnavailable {
                name: name.clone(),
                message: format!("bad model file: {e}"),
            })?;
        if let Some((word, v)) = parsed
            .vectors
            .iter()
            .find(|(_, v)| v.len() != parsed.dimension)
        {
            log::error!("word {word:?} has a wrong-sized vector");
            return Err(EncoderError::DimensionMismatch {
                name,
                expected: parsed.dimension,
                got: v.len(),
            });
        }
        Ok(WordVectorEncoder {
            dimension: parsed.dimension,
            vectors: parsed.vectors,
            name,
        })
    }
}

impl Encoder for WordVectorEncoder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EncoderError> {
        Ok(texts
            .iter()
            .map(|text| {
                let mut v = vec![0.0f64; self.dimension];
                let mut hits = 0usize;
                for token in text.trim().to_lowercase().split_whitespace() {
                    if let Some(wv) = self.vectors.get(token) {
                        for (a, b) in v.iter_mut().zip(wv) {
                            *a += b;
                        }
                        hits += 1;
                    }
                }
                if hits > 0 {
                    for a in &mut v {
                        *a /= hits as f64;
                    }
                }
                v
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashed_is_deterministic() {
        let enc = HashedEncoder::new(64, 7);
        let a = enc.embed("abc").unwrap();
        let b = enc.embed("abc").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn hashed_empty_string_is_zero_vector() {
        let enc = HashedEncoder::new(64, 7);
        let v = enc.embed("").unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn hashed_vectors_are_unit_norm() {
        let enc = HashedEncoder::new(256, 7);
        let v = enc.embed("some ordinary words here").unwrap();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shared_words_raise_similarity() {
        let enc = HashedEncoder::new(256, 7);
        let a = enc.embed("the city budget vote tonight").unwrap();
        let b = enc.embed("the city budget vote failed").unwrap();
        let c = enc.embed("completely unrelated melody stuff").unwrap();
        let cos = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        assert!(cos(&a, &b) > cos(&a, &c));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            EncoderHandle::parse("fallback").unwrap(),
            EncoderHandle::HashedFallback {
                dimension: 256,
                seed: 0x5EED
            }
        );
        assert_eq!(
            EncoderHandle::parse("fallback:dim=32,seed=9").unwrap(),
            EncoderHandle::HashedFallback {
                dimension: 32,
                seed: 9
            }
        );
        assert_eq!(
            EncoderHandle::parse("https://host/embed#dim=384").unwrap(),
            EncoderHandle::HttpEndpoint {
                url: "https://host/embed".to_string(),
                dimension: 384
            }
        );
        assert!(EncoderHandle::parse("https://host/embed").is_err());
        assert!(EncoderHandle::parse("gibberish").is_err());
    }

    #[test]
    fn word_vector_encoder_averages() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.json");
        std::fs::write(
            &path,
            r#"{"dimension": 2, "vectors": {"hot": [1.0, 0.0], "cold": [0.0, 1.0]}}"#,
        )
        .unwrap();
        let enc = WordVectorEncoder::load(&path).unwrap();
        assert_eq!(enc.embed("hot cold").unwrap(), vec![0.5, 0.5]);
        assert_eq!(enc.embed("unknown words").unwrap(), vec![0.0, 0.0]);
        assert!(WordVectorEncoder::load(&dir.path().join("missing.json")).is_err());
    }
}
