//! Adapter for an externally hosted detector (for instance an actual
//! fine-tuned transformer): ship it the balanced set, get back a held-out
//! accuracy.
//!
//! Wire format: `POST <url>` with
//! `{"items": [{"text": "...", "label": "human"|"ai"}], "val_fraction": f,
//!   "seed": n}`, response `{"accuracy": f}`.

use serde::Deserialize;

use crate::corpus::{BalancedSet, Label};

use super::DetectorError;

pub struct ExternalDetector {
    url: String,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct TrainEvalResponse {
    accuracy: f64,
}

impl ExternalDetector {
    pub fn new(url: String) -> Self {
        ExternalDetector {
            url,
            client: reqwest::blocking::Client::new(),
        }
    }

    /// Train remotely on the balanced set and return held-out accuracy.
    pub fn train_eval(
        &self,
        set: &BalancedSet,
        val_fraction: f64,
        seed: u64,
    ) -> Result<f64, DetectorError> {
        let items: Vec<serde_json::Value> = set
            .items
            .iter()
            .map(|(text, label)| {
                serde_json::json!({
                    "text": text,
                    "label": match label { Label::Human => "human", Label::Ai => "ai" },
                })
            })
            .collect();
        let body = serde_json::json!({
            "items": items,
            "val_fraction": val_fraction,
            "seed": seed,
        });
        let resp = self
            .client
            .post(&self.url)
            .json(&body)
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| DetectorError::Endpoint {
                url: self.url.clone(),
                message: e.to_string(),
            })?;
        let parsed: TrainEvalResponse =
            resp.json().map_err(|e| DetectorError::Endpoint {
                url: self.url.clone(),
                message: format!("bad response body: {e}"),
            })?;
        if !(0.0..=1.0).contains(&parsed.accuracy) {
            return Err(DetectorError::Endpoint {
                url: self.url.clone(),
                message: format!("accuracy {} outside [0,1]", parsed.accuracy),
            });
        }
        Ok(parsed.accuracy)
    }
}
