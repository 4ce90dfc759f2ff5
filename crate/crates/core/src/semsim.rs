//! Semantic fidelity: cosine similarity between generated/reference reply
//! pairs and summary statistics over the score distribution.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::{Encoder, EncoderError};

#[derive(Debug, Error)]
pub enum SemsimError {
    #[error("vector dimensions differ: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("no pairs to score")]
    EmptyPairs,
    #[error("encoder failed on pair {pair_index}: {source}")]
    Encoder {
        pair_index: usize,
        #[source]
        source: EncoderError,
    },
}

/// Cosine similarity in [-1, 1]; 0 when either vector has zero norm (the
/// documented convention for empty generations under the hashed encoder).
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, SemsimError> {
    if a.len() != b.len() {
        return Err(SemsimError::DimensionMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Distribution summary of pairwise similarity scores. Quartiles use
/// linear interpolation between closest ranks, the same convention the
/// box-plot exports rely on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityDistribution {
    pub scores: Vec<f64>,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub n: usize,
    /// Indices of pairs where a zero-norm vector forced the score to 0,
    /// so downstream analysis can exclude them.
    pub zero_vector_pairs: Vec<usize>,
}

/// Linear-interpolation quantile of an ascending-sorted slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&q));
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

impl SimilarityDistribution {
    pub fn from_scores(scores: Vec<f64>, zero_vector_pairs: Vec<usize>) -> Self {
        assert!(!scores.is_empty());
        let mut sorted = scores.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
        SimilarityDistribution {
            n: scores.len(),
            median: quantile(&sorted, 0.5),
            q1: quantile(&sorted, 0.25),
            q3: quantile(&sorted, 0.75),
            scores,
            zero_vector_pairs,
        }
    }

    /// CSV export: pair_id, score.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pair_id,score\n");
        for (i, s) in self.scores.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", crate::report::format_float(*s)));
        }
        out
    }

    /// Summary JSON mirroring one box-plot cell.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "n": self.n,
            "n_zero_vector_pairs": self.zero_vector_pairs.len(),
        })
    }
}

/// Score every (generated, reference) pair and summarize the distribution.
pub fn pairwise_similarity(
    pairs: &[(String, String)],
    encoder: &dyn Encoder,
) -> Result<SimilarityDistribution, SemsimError> {
    if pairs.is_empty() {
        return Err(SemsimError::EmptyPairs);
    }
    let mut scores = Vec::with_capacity(pairs.len());
    let mut zero_pairs = Vec::new();
    for (i, (generated, reference)) in pairs.iter().enumerate() {
        let batch = encoder
            .embed_batch(&[generated.clone(), reference.clone()])
            .map_err(|source| SemsimError::Encoder {
                pair_index: i,
                source,
            })?;
        let na: f64 = batch[0].iter().map(|x| x * x).sum::<f64>();
        let nb: f64 = batch[1].iter().map(|x| x * x).sum::<f64>();
        if na == 0.0 || nb == 0.0 {
            zero_pairs.push(i);
        }
        scores.push(cosine(&batch[0], &batch[1])?);
    }
    Ok(SimilarityDistribution::from_scores(scores, zero_pairs))
}
