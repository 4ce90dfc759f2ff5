//! Run configuration file (TOML).
//!
//! One file drives every pipeline command. Auth tokens are never stored in
//! the file — `endpoint.auth_env` names an environment variable instead.
//!
//! ```toml
//! [run]
//! out = "runs/demo"            # artifact directory (--out overrides)
//! seed = 42                    # sampling seed (--seed overrides)
//! seeds = [17, 42, 1337]       # detector seeds
//!
//! [corpus]
//! path = "corpus.jsonl"
//! min_test_replies = 20
//! per_user = 20
//! # max_users = 250
//!
//! [encoder]
//! spec = "fallback"            # fallback[:dim=256,seed=N] | url#dim=N | file:vectors.json
//!
//! [endpoint]
//! base_url = "fake://styled?seed=7"   # or an http(s) chat-completions base url
//! model = "demo-model"
//! temperature = 0.8
//! # auth_env = "CTT_API_TOKEN"
//!
//! [generation]
//! config = "pe_se"             # bl | pe | pe_se | pe_se_cr
//! n = 20
//! n_style_examples = 10
//! n_retrieved = 3
//!
//! [persona]
//! sample_size = 100
//! # endpoint = { base_url = "...", model = "..." }   # defaults to [endpoint]
//!
//! [topics]
//! lexicon = "builtin-demo"     # or a path to a lexicon file
//! alpha = 0.05
//! top_k = 20
//!
//! [selection]
//! n_folds = 5
//!
//! [detect]
//! val_fraction = 0.2
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::detector::{DEFAULT_SEEDS, DEFAULT_VAL_FRACTION};
use crate::genharness::{EndpointConfig, PromptKind, DEFAULT_CANDIDATES, DEFAULT_PERSONA_SAMPLE};
use crate::selector::DEFAULT_N_FOLDS;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("config error: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub out: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Dataset label for report cells; defaults to the corpus platform.
    #[serde(default)]
    pub dataset: Option<String>,
}

fn default_seed() -> u64 {
    42
}
fn default_seeds() -> Vec<u64> {
    DEFAULT_SEEDS.to_vec()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub path: PathBuf,
    #[serde(default = "default_min_test")]
    pub min_test_replies: usize,
    #[serde(default = "default_per_user")]
    pub per_user: usize,
    #[serde(default)]
    pub max_users: Option<usize>,
}

fn default_min_test() -> usize {
    20
}
fn default_per_user() -> usize {
    20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderSection {
    #[serde(default = "default_encoder_spec")]
    pub spec: String,
}

impl Default for EncoderSection {
    fn default() -> Self {
        EncoderSection {
            spec: default_encoder_spec(),
        }
    }
}

fn default_encoder_spec() -> String {
    "fallback".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationSection {
    #[serde(default = "default_kind")]
    pub config: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_style_examples")]
    pub n_style_examples: usize,
    #[serde(default = "default_retrieved")]
    pub n_retrieved: usize,
}

impl Default for GenerationSection {
    fn default() -> Self {
        GenerationSection {
            config: default_kind(),
            n: default_n(),
            n_style_examples: default_style_examples(),
            n_retrieved: default_retrieved(),
        }
    }
}

fn default_kind() -> String {
    "pe".to_string()
}
fn default_n() -> usize {
    DEFAULT_CANDIDATES
}
fn default_style_examples() -> usize {
    10
}
fn default_retrieved() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaSection {
    #[serde(default = "default_persona_sample")]
    pub sample_size: usize,
    /// Separate synthesis endpoint; the main endpoint when absent.
    #[serde(default)]
    pub endpoint: Option<EndpointConfig>,
}

impl Default for PersonaSection {
    fn default() -> Self {
        PersonaSection {
            sample_size: default_persona_sample(),
            endpoint: None,
        }
    }
}

fn default_persona_sample() -> usize {
    DEFAULT_PERSONA_SAMPLE
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicsSection {
    #[serde(default = "default_lexicon")]
    pub lexicon: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

impl Default for TopicsSection {
    fn default() -> Self {
        TopicsSection {
            lexicon: default_lexicon(),
            alpha: default_alpha(),
            top_k: default_top_k(),
        }
    }
}

fn default_lexicon() -> String {
    "builtin-demo".to_string()
}
fn default_alpha() -> f64 {
    0.05
}
fn default_top_k() -> usize {
    20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSection {
    #[serde(default = "default_n_folds")]
    pub n_folds: usize,
}

impl Default for SelectionSection {
    fn default() -> Self {
        SelectionSection {
            n_folds: default_n_folds(),
        }
    }
}

fn default_n_folds() -> usize {
    DEFAULT_N_FOLDS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectSection {
    #[serde(default = "default_val_fraction")]
    pub val_fraction: f64,
}

impl Default for DetectSection {
    fn default() -> Self {
        DetectSection {
            val_fraction: default_val_fraction(),
        }
    }
}

fn default_val_fraction() -> f64 {
    DEFAULT_VAL_FRACTION
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub corpus: CorpusSection,
    #[serde(default)]
    pub encoder: EncoderSection,
    #[serde(default)]
    pub endpoint: Option<EndpointConfig>,
    #[serde(default)]
    pub persona: PersonaSection,
    #[serde(default)]
    pub generation: GenerationSection,
    #[serde(default)]
    pub topics: TopicsSection,
    #[serde(default)]
    pub selection: SelectionSection,
    #[serde(default)]
    pub detect: DetectSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let content = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: RunConfig = toml::from_str(&content).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn prompt_kind(&self) -> Result<PromptKind, ConfigError> {
        PromptKind::parse(&self.generation.config).ok_or_else(|| {
            ConfigError::Invalid(format!(
                "generation.config: unknown kind {:?} (expected bl, pe, pe_se, pe_se_cr)",
                self.generation.config
            ))
        })
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.prompt_kind()?;
        if !(0.0..1.0).contains(&self.topics.alpha) {
            return Err(ConfigError::Invalid(format!(
                "topics.alpha must be in [0,1), got {}",
                self.topics.alpha
            )));
        }
        if !(self.detect.val_fraction > 0.0 && self.detect.val_fraction < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "detect.val_fraction must be in (0,1), got {}",
                self.detect.val_fraction
            )));
        }
        if self.generation.n == 0 {
            return Err(ConfigError::Invalid(
                "generation.n must be at least 1".to_string(),
            ));
        }
        if self.selection.n_folds < 2 {
            return Err(ConfigError::Invalid(
                "selection.n_folds must be at least 2".to_string(),
            ));
        }
        if self.run.seeds.is_empty() {
            return Err(ConfigError::Invalid(
                "run.seeds must not be empty".to_string(),
            ));
        }
        Ok(())
    }
}
