//! The detectability arm of the computational Turing test.
//!
//! Two detectors share this module. The embedding detector freezes a
//! sentence encoder and trains a logistic head on a balanced human/AI set,
//! reporting validation accuracy averaged over seeds — the experimental
//! protocol of a fine-tuned transformer detector at desk scale (a genuinely
//! fine-tuned model can be plugged in through [`ExternalDetector`]). The
//! forest detector trains on the 19 interpretable features and reports
//! Gini importances, which is what makes the detectability readable.

pub mod external;
pub mod forest;
pub mod logistic;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    build_balanced_set, split_train_val, BalancedSet, CorpusError, Label, Reply,
};
use crate::encoder::{Encoder, EncoderError};
use crate::textfeat::{FeatureVector, FEATURE_NAMES};

pub use external::ExternalDetector;
pub use forest::{ForestParams, RandomForest};
pub use logistic::{LogisticHead, TrainParams};

/// Seeds used when the caller does not supply any.
pub const DEFAULT_SEEDS: [u64; 3] = [17, 42, 1337];

/// Validation fraction used when the caller does not supply one.
pub const DEFAULT_VAL_FRACTION: f64 = 0.2;

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("class {label:?} has {count} examples; need at least 2")]
    TooFewPerClass { label: Label, count: usize },
    #[error("input does not match the model: expected {expected}, got {got}")]
    SchemaMismatch { expected: String, got: String },
    #[error("external detector {url} failed: {message}")]
    Endpoint { url: String, message: String },
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Embedding-head detector: frozen encoder plus trained logistic head.
pub struct EmbeddingHeadModel {
    pub head: LogisticHead,
    pub encoder: Arc<dyn Encoder>,
}

/// Forest detector over the interpretable feature schema.
pub struct ForestModel {
    pub forest: RandomForest,
    pub feature_schema: Vec<String>,
}

pub enum DetectorModel {
    EmbeddingHead(EmbeddingHeadModel),
    Forest(ForestModel),
}

/// Input to [`predict_proba`]; must match the model kind.
pub enum DetectorInput<'a> {
    Text(&'a str),
    Features(&'a FeatureVector),
}

/// Probability that the input is AI-authored.
pub fn predict_proba(model: &DetectorModel, input: DetectorInput) -> Result<f64, DetectorError> {
    match (model, input) {
        (DetectorModel::EmbeddingHead(m), DetectorInput::Text(text)) => {
            let v = m.encoder.embed(text)?;
            Ok(m.head.predict_proba(&v))
        }
        (DetectorModel::Forest(m), DetectorInput::Features(fv)) => {
            m.forest.predict_proba_ai(&fv.as_array())
        }
        (DetectorModel::EmbeddingHead(_), DetectorInput::Features(_)) => {
            Err(DetectorError::SchemaMismatch {
                expected: "text".to_string(),
                got: "feature vector".to_string(),
            })
        }
        (DetectorModel::Forest(_), DetectorInput::Text(_)) => Err(DetectorError::SchemaMismatch {
            expected: "feature vector".to_string(),
            got: "text".to_string(),
        }),
    }
}

/// Seed-averaged detection accuracy. A mean accuracy near 0.5 means the
/// detector cannot separate generated text from human text; high accuracy
/// means the generations are readily distinguishable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub per_seed_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    pub seeds: Vec<u64>,
    pub n_train: usize,
    pub n_val: usize,
    /// Fixed interpretation note carried into report text.
    pub interpretation: String,
}

impl DetectionResult {
    pub const INTERPRETATION: &'static str = "mean accuracy near 0.5 means the detector cannot \
        separate generated from human text; higher accuracy means generations are more \
        distinguishable";

    fn new(per_seed_accuracy: Vec<f64>, seeds: Vec<u64>, n_train: usize, n_val: usize) -> Self {
        let mean_accuracy =
            per_seed_accuracy.iter().sum::<f64>() / per_seed_accuracy.len() as f64;
        DetectionResult {
            per_seed_accuracy,
            mean_accuracy,
            seeds,
            n_train,
            n_val,
            interpretation: Self::INTERPRETATION.to_string(),
        }
    }
}

/// Normalized feature importances with a descending top-k view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportanceReport {
    pub importances: BTreeMap<String, f64>,
    pub top_k: Vec<(String, f64)>,
    /// Forest hyperparameters, recorded for auditability.
    pub n_trees: usize,
    pub seed: u64,
}

impl FeatureImportanceReport {
    /// CSV export: feature, importance (one row per feature, heatmap-ready).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,importance\n");
        for (name, value) in &self.top_k {
            out.push_str(&format!(
                "{name},{}\n",
                crate::report::format_float(*value)
            ));
        }
        out
    }
}

/// Train the logistic head on frozen embeddings of a balanced set.
pub fn train_embedding_detector(
    train: &BalancedSet,
    encoder: Arc<dyn Encoder>,
    seed: u64,
    params: &TrainParams,
) -> Result<DetectorModel, DetectorError> {
    if train.is_empty() {
        return Err(DetectorError::SingleClass);
    }
    let texts: Vec<String> = train.items.iter().map(|(t, _)| t.clone()).collect();
    let x = encoder.embed_batch(&texts)?;
    let y: Vec<f64> = train
        .items
        .iter()
        .map(|(_, l)| if *l == Label::Ai { 1.0 } else { 0.0 })
        .collect();
    let head = LogisticHead::fit(&x, &y, seed, params)?;
    Ok(DetectorModel::EmbeddingHead(EmbeddingHeadModel {
        head,
        encoder,
    }))
}

fn accuracy(head: &LogisticHead, x: &[Vec<f64>], y: &[f64]) -> f64 {
    let correct = x
        .iter()
        .zip(y)
        .filter(|(xi, &yi)| (head.predict_proba(xi) > 0.5) == (yi > 0.5))
        .count();
    correct as f64 / x.len() as f64
}

/// The embedding-detector protocol, end to end: for every seed build a
/// balanced set, split off a validation fraction, train the head on frozen
/// embeddings, and score held-out accuracy; report per-seed accuracies and
/// their mean.
pub fn run_turing_test(
    ai_texts: &[String],
    human_pool: &[&Reply],
    encoder: Arc<dyn Encoder>,
    seeds: &[u64],
    val_fraction: f64,
    params: &TrainParams,
) -> Result<DetectionResult, DetectorError> {
    assert!(!seeds.is_empty(), "need at least one seed");
    let mut per_seed = Vec::with_capacity(seeds.len());
    let mut n_train = 0;
    let mut n_val = 0;
    for &seed in seeds {
        let balanced = build_balanced_set(ai_texts, human_pool, seed)?;
        let (train, val) = split_train_val(&balanced, val_fraction, seed)?;
        n_train = train.len();
        n_val = val.len();

        let train_texts: Vec<String> = train.items.iter().map(|(t, _)| t.clone()).collect();
        let val_texts: Vec<String> = val.items.iter().map(|(t, _)| t.clone()).collect();
        let x_train = encoder.embed_batch(&train_texts)?;
        let x_val = encoder.embed_batch(&val_texts)?;
        let to_y = |set: &BalancedSet| -> Vec<f64> {
            set.items
                .iter()
                .map(|(_, l)| if *l == Label::Ai { 1.0 } else { 0.0 })
                .collect()
        };
        let y_train = to_y(&train);
        let y_val = to_y(&val);

        let head = LogisticHead::fit(&x_train, &y_train, seed, params)?;
        per_seed.push(accuracy(&head, &x_val, &y_val));
    }
    Ok(DetectionResult::new(
        per_seed,
        seeds.to_vec(),
        n_train,
        n_val,
    ))
}

/// Train the interpretable forest detector and report importances.
pub fn train_forest_detector(
    features: &[FeatureVector],
    labels: &[Label],
    n_trees: usize,
    seed: u64,
) -> Result<(DetectorModel, FeatureImportanceReport), DetectorError> {
    assert_eq!(features.len(), labels.len());
    for class in [Label::Human, Label::Ai] {
        let count = labels.iter().filter(|l| **l == class).count();
        if count == 0 {
            return Err(DetectorError::SingleClass);
        }
        if count < 2 {
            return Err(DetectorError::TooFewPerClass {
                label: class,
                count,
            });
        }
    }
    let rows: Vec<Vec<f64>> = features.iter().map(|f| f.as_array().to_vec()).collect();
    let params = ForestParams {
        n_trees,
        ..ForestParams::default()
    };
    let forest = RandomForest::fit(&rows, labels, params, seed)?;

    let importances_vec = forest.importances();
    let mut importances = BTreeMap::new();
    let mut top_k: Vec<(String, f64)> = Vec::with_capacity(FEATURE_NAMES.len());
    for (name, value) in FEATURE_NAMES.iter().zip(&importances_vec) {
        importances.insert(name.to_string(), *value);
        top_k.push((name.to_string(), *value));
    }
    top_k.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));

    let report = FeatureImportanceReport {
        importances,
        top_k,
        n_trees,
        seed,
    };
    let model = DetectorModel::Forest(ForestModel {
        forest,
        feature_schema: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
    });
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Platform, Source, Split};
    use crate::encoder::HashedEncoder;
    use crate::rng::Rng;
    use crate::textfeat::{extract_features, LexiconSet, LexiconToxicity};

    fn pool_texts(n: usize, seed: u64) -> Vec<String> {
        let vocab = [
            "the", "game", "tonight", "was", "wild", "honestly", "cannot", "believe", "they",
            "pulled", "that", "off", "again", "what", "a", "move", "season", "fans", "crowd",
            "energy", "play", "coach", "team", "city", "vote", "news", "story", "thread",
        ];
        let mut rng = Rng::new(seed);
        (0..n)
            .map(|_| {
                let len = 6 + rng.gen_range(8) as usize;
                (0..len)
                    .map(|_| vocab[rng.gen_range(vocab.len() as u64) as usize])
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    }

    fn pool_replies(texts: &[String]) -> Vec<Reply> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Reply {
                id: format!("h{i}"),
                user_id: "u".to_string(),
                platform: Platform::Twitter,
                parent_text: String::new(),
                text: t.clone(),
                split: Split::Train,
                source: Source::Human,
            })
            .collect()
    }

    #[test]
    fn null_case_accuracy_near_chance() {
        let texts = pool_texts(400, 1);
        let replies = pool_replies(&texts);
        let pool: Vec<&Reply> = replies.iter().collect();
        let mut rng = Rng::new(2);
        let ai: Vec<String> = rng
            .sample_indices(texts.len(), 200)
            .into_iter()
            .map(|i| texts[i].clone())
            .collect();
        let enc = Arc::new(HashedEncoder::new(128, 5));
        let result = run_turing_test(
            &ai,
            &pool,
            enc,
            &DEFAULT_SEEDS,
            DEFAULT_VAL_FRACTION,
            &TrainParams::default(),
        )
        .unwrap();
        assert!(
            (0.38..=0.62).contains(&result.mean_accuracy),
            "mean accuracy {} too far from chance",
            result.mean_accuracy
        );
    }

    #[test]
    fn sentinel_suffix_is_caught() {
        let texts = pool_texts(300, 3);
        let replies = pool_replies(&texts);
        let pool: Vec<&Reply> = replies.iter().collect();
        let mut rng = Rng::new(4);
        let ai: Vec<String> = rng
            .sample_indices(texts.len(), 150)
            .into_iter()
            .map(|i| format!("{} zq9x", texts[i]))
            .collect();
        let enc = Arc::new(HashedEncoder::new(128, 5));
        let result = run_turing_test(
            &ai,
            &pool,
            enc,
            &DEFAULT_SEEDS,
            DEFAULT_VAL_FRACTION,
            &TrainParams::default(),
        )
        .unwrap();
        assert!(
            result.mean_accuracy >= 0.95,
            "mean accuracy {}",
            result.mean_accuracy
        );
    }

    #[test]
    fn mean_recomputes_from_per_seed() {
        let r = DetectionResult::new(vec![0.5, 0.6, 0.7], vec![1, 2, 3], 10, 2);
        assert!((r.mean_accuracy - 0.6).abs() < 1e-12);
        assert_eq!(r.per_seed_accuracy.len(), r.seeds.len());
    }

    #[test]
    fn embedding_detector_deterministic() {
        let texts = pool_texts(60, 7);
        let replies = pool_replies(&texts);
        let pool: Vec<&Reply> = replies.iter().collect();
        let ai = pool_texts(30, 8);
        let set = build_balanced_set(&ai, &pool, 5).unwrap();
        let enc: Arc<dyn Encoder> = Arc::new(HashedEncoder::new(64, 5));
        let a = train_embedding_detector(&set, enc.clone(), 11, &TrainParams::default()).unwrap();
        let b = train_embedding_detector(&set, enc, 11, &TrainParams::default()).unwrap();
        match (a, b) {
            (DetectorModel::EmbeddingHead(ma), DetectorModel::EmbeddingHead(mb)) => {
                assert_eq!(ma.head, mb.head);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn predict_proba_schema_mismatch() {
        let fv = extract_features("hello", LexiconSet::builtin(), &LexiconToxicity::builtin())
            .unwrap();
        let enc: Arc<dyn Encoder> = Arc::new(HashedEncoder::new(8, 1));
        let model = DetectorModel::EmbeddingHead(EmbeddingHeadModel {
            head: LogisticHead {
                weights: vec![0.0; 8],
                bias: 0.0,
            },
            encoder: enc,
        });
        assert!(matches!(
            predict_proba(&model, DetectorInput::Features(&fv)),
            Err(DetectorError::SchemaMismatch { .. })
        ));
        assert_eq!(
            predict_proba(&model, DetectorInput::Text("anything")).unwrap(),
            0.5
        );
    }

    #[test]
    fn forest_detector_emoji_importance() {
        let lex = LexiconSet::builtin();
        let tox = LexiconToxicity::builtin();
        let base =
            extract_features("nice play in the game tonight", lex, &tox).unwrap();
        let mut rng = Rng::new(6);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..30 {
            // Identical vectors except the emoji count carries the class.
            let mut human = base.clone();
            human.emoji_count = 2 + rng.gen_range(2) as u32;
            features.push(human);
            labels.push(Label::Human);
            let mut ai = base.clone();
            ai.emoji_count = rng.gen_range(2) as u32;
            features.push(ai);
            labels.push(Label::Ai);
        }
        let (_, report) = train_forest_detector(&features, &labels, 100, 9).unwrap();
        assert_eq!(report.top_k[0].0, "emoji_count");
        assert!(report.top_k[0].1 >= 0.5);
        let sum: f64 = report.importances.values().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}
