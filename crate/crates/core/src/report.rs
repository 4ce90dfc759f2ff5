//! Run manifests, report bundles, stepwise deltas, and the fixed number
//! formatting every emitted table uses.
//!
//! A bundle is a pure function of the raw artifacts on disk: every number
//! in it is recomputed from stored scores or per-seed accuracies at
//! assembly time, and all floats pass through [`round_sig`]/[`format_float`]
//! (6 significant digits), so re-running report over unchanged artifacts
//! reproduces the bundle byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::detector::{DetectionResult, FeatureImportanceReport};
use crate::genharness::PromptKind;
use crate::semsim::SimilarityDistribution;
use crate::topics::DivergenceReport;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad manifest or bundle JSON in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("no adjacent configuration pairs among {0:?}")]
    NonAdjacentConfigs(Vec<String>),
}

const SIGNIFICANT_DIGITS: i32 = 6;

/// Round to 6 significant digits; applied to every float a report emits.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let magnitude = v.abs().log10().floor() as i32;
    let factor = 10f64.powi(SIGNIFICANT_DIGITS - 1 - magnitude);
    (v * factor).round() / factor
}

/// Fixed 6-significant-digit text form of a float.
pub fn format_float(v: f64) -> String {
    let rounded = round_sig(v);
    if rounded == 0.0 {
        return "0".to_string();
    }
    if !rounded.is_finite() {
        return rounded.to_string();
    }
    if (1e-4..1e15).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn unix_to_iso8601(secs: u64) -> String {
    // Civil-from-days (Hinnant); good for the full u64 range we care about.
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    let (h, m, s) = (rem / 3600, (rem / 60) % 60, rem % 60);
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = if month <= 2 { y + 1 } else { y };
    format!("{year:04}-{month:02}-{d:02}T{h:02}:{m:02}:{s:02}Z")
}

/// Provenance record every emitted report references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub created_unix: u64,
    pub created_utc: String,
    pub corpus_sha256: String,
    pub dataset: String,
    pub lexicon_versions: BTreeMap<String, String>,
    pub encoder: String,
    pub seeds: Vec<u64>,
    pub config_kinds: Vec<String>,
    pub template_hashes: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String, ReportError> {
    let bytes = std::fs::read(path).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

impl RunManifest {
    #[allow(clippy::too_many_arguments)]
    pub fn create(
        run_id: String,
        corpus_path: &Path,
        dataset: String,
        lexicon_versions: BTreeMap<String, String>,
        encoder: String,
        seeds: Vec<u64>,
        config_kinds: Vec<String>,
        template_hashes: BTreeMap<String, String>,
    ) -> Result<Self, ReportError> {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .expect("clock after 1970")
            .as_secs();
        Ok(RunManifest {
            run_id,
            created_unix,
            created_utc: unix_to_iso8601(created_unix),
            corpus_sha256: sha256_file(corpus_path)?,
            dataset,
            lexicon_versions,
            encoder,
            seeds,
            config_kinds,
            template_hashes,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ReportError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json + "\n").map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let content = std::fs::read_to_string(path).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&content).map_err(|e| ReportError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// A report cell is either present or explicitly marked missing — never
/// silently absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Cell<T> {
    Present { value: T },
    Missing { reason: String },
}

impl<T> Cell<T> {
    pub fn present(value: T) -> Self {
        Cell::Present { value }
    }

    pub fn missing(reason: impl Into<String>) -> Self {
        Cell::Missing {
            reason: reason.into(),
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Cell::Present { value } => Some(value),
            Cell::Missing { .. } => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing { .. })
    }
}

/// Detection cell: per-seed accuracies and their mean, rounded for
/// emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionCell {
    pub per_seed_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    pub seeds: Vec<u64>,
    pub n_train: usize,
    pub n_val: usize,
    pub interpretation: String,
}

impl From<&DetectionResult> for DetectionCell {
    fn from(r: &DetectionResult) -> Self {
        DetectionCell {
            per_seed_accuracy: r.per_seed_accuracy.iter().map(|a| round_sig(*a)).collect(),
            mean_accuracy: round_sig(r.mean_accuracy),
            seeds: r.seeds.clone(),
            n_train: r.n_train,
            n_val: r.n_val,
            interpretation: r.interpretation.clone(),
        }
    }
}

/// Box-plot cell for similarity distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityCell {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub n: usize,
    pub n_zero_vector_pairs: usize,
}

impl From<&SimilarityDistribution> for SimilarityCell {
    fn from(d: &SimilarityDistribution) -> Self {
        SimilarityCell {
            median: round_sig(d.median),
            q1: round_sig(d.q1),
            q3: round_sig(d.q3),
            n: d.n,
            n_zero_vector_pairs: d.zero_vector_pairs.len(),
        }
    }
}

/// Importance heatmap cell: top-10 features by importance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceCell {
    pub top_features: Vec<(String, f64)>,
    pub n_trees: usize,
    pub seed: u64,
}

impl From<&FeatureImportanceReport> for ImportanceCell {
    fn from(r: &FeatureImportanceReport) -> Self {
        ImportanceCell {
            top_features: r
                .top_k
                .iter()
                .take(10)
                .map(|(name, v)| (name.clone(), round_sig(*v)))
                .collect(),
            n_trees: r.n_trees,
            seed: r.seed,
        }
    }
}

/// Topical divergence cell: which categories stayed significantly
/// different after FDR control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCell {
    pub n_categories: usize,
    pub n_significant: usize,
    pub significant_categories: Vec<(String, String)>,
    pub alpha: f64,
    pub lexicon_version: String,
}

impl From<&DivergenceReport> for DivergenceCell {
    fn from(r: &DivergenceReport) -> Self {
        let significant: Vec<(String, String)> = r
            .rows
            .iter()
            .filter(|row| row.significant)
            .map(|row| (row.category.clone(), row.direction.as_str().to_string()))
            .collect();
        DivergenceCell {
            n_categories: r.rows.len(),
            n_significant: significant.len(),
            significant_categories: significant,
            alpha: r.alpha,
            lexicon_version: r.lexicon_version.clone(),
        }
    }
}

/// Selection cell: chosen-index agreement between the two strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionCell {
    pub n_sets: usize,
    pub overlap_cosine_ml: f64,
    pub feature_schema: Vec<String>,
}

/// Accuracy change when one ladder component is added; negative means the
/// added component made generations harder to detect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDelta {
    pub from: String,
    pub to: String,
    pub mean_accuracy_from: f64,
    pub mean_accuracy_to: f64,
    pub delta: f64,
}

pub const STEPWISE_LEGEND: &str = "delta = mean accuracy after adding the component minus \
    before; negative deltas mean the addition made generations less detectable";

/// Deltas across adjacent rungs of the configuration ladder present in
/// `results` (keyed by prompt kind, values are mean accuracies).
pub fn emit_stepwise_deltas(
    results: &BTreeMap<PromptKind, f64>,
) -> Result<Vec<StepDelta>, ReportError> {
    let mut deltas = Vec::new();
    for pair in PromptKind::LADDER.windows(2) {
        let (from, to) = (pair[0], pair[1]);
        if let (Some(&a), Some(&b)) = (results.get(&from), results.get(&to)) {
            deltas.push(StepDelta {
                from: from.as_str().to_string(),
                to: to.as_str().to_string(),
                mean_accuracy_from: round_sig(a),
                mean_accuracy_to: round_sig(b),
                delta: round_sig(b - a),
            });
        }
    }
    if deltas.is_empty() {
        return Err(ReportError::NonAdjacentConfigs(
            results.keys().map(|k| k.as_str().to_string()).collect(),
        ));
    }
    Ok(deltas)
}

pub fn stepwise_deltas_csv(deltas: &BTreeMap<String, Vec<StepDelta>>) -> String {
    let mut out = String::from("model,from,to,mean_accuracy_from,mean_accuracy_to,delta\n");
    for (model, rows) in deltas {
        for d in rows {
            out.push_str(&format!(
                "{model},{},{},{},{},{}\n",
                d.from,
                d.to,
                format_float(d.mean_accuracy_from),
                format_float(d.mean_accuracy_to),
                format_float(d.delta)
            ));
        }
    }
    out
}

/// The assembled report: every measurement cell per (model, config) key
/// for one dataset, all referencing one manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub manifest: RunManifest,
    pub detection: BTreeMap<String, Cell<DetectionCell>>,
    pub similarity: BTreeMap<String, Cell<SimilarityCell>>,
    pub importances: BTreeMap<String, Cell<ImportanceCell>>,
    pub divergence: BTreeMap<String, Cell<DivergenceCell>>,
    pub selection: BTreeMap<String, Cell<SelectionCell>>,
    pub stepwise_deltas: BTreeMap<String, Vec<StepDelta>>,
    pub stepwise_legend: String,
}

impl ReportBundle {
    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes") + "\n"
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let content = std::fs::read_to_string(path).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&content).map_err(|e| ReportError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn missing_cells(&self) -> Vec<String> {
        let mut missing = Vec::new();
        let mut scan = |section: &str, keys: Vec<(&String, bool)>| {
            for (key, is_missing) in keys {
                if is_missing {
                    missing.push(format!("{section}/{key}"));
                }
            }
        };
        scan(
            "detection",
            self.detection.iter().map(|(k, v)| (k, v.is_missing())).collect(),
        );
        scan(
            "similarity",
            self.similarity.iter().map(|(k, v)| (k, v.is_missing())).collect(),
        );
        scan(
            "importances",
            self.importances.iter().map(|(k, v)| (k, v.is_missing())).collect(),
        );
        scan(
            "divergence",
            self.divergence.iter().map(|(k, v)| (k, v.is_missing())).collect(),
        );
        scan(
            "selection",
            self.selection.iter().map(|(k, v)| (k, v.is_missing())).collect(),
        );
        missing
    }
}
