//! Tokenization and the 19 interpretable text features.

pub mod features;
pub mod lexicon;
pub mod sentiment;
pub mod tokenize;
pub mod toxicity;

pub use features::{extract_features, self_entropy, FeatureVector, TextFeatError, FEATURE_NAMES};
pub use lexicon::{parse_word_list, LexiconError, LexiconSet, WordList};
pub use tokenize::{tokenize, TokenStream};
pub use toxicity::{HttpToxicity, LexiconToxicity, ToxicityError, ToxicityScorer};

/// Lexica plus a toxicity scorer, bundled so batch consumers can extract
/// features with one handle.
pub struct FeaturePipeline<'a> {
    pub lexica: &'a LexiconSet,
    pub toxicity: &'a dyn ToxicityScorer,
}

impl<'a> FeaturePipeline<'a> {
    /// The builtin lexica with the lexicon-fallback toxicity scorer.
    pub fn builtin() -> FeaturePipeline<'static> {
        use std::sync::OnceLock;
        static TOX: OnceLock<LexiconToxicity> = OnceLock::new();
        FeaturePipeline {
            lexica: LexiconSet::builtin(),
            toxicity: TOX.get_or_init(LexiconToxicity::builtin),
        }
    }

    pub fn extract(&self, text: &str) -> Result<FeatureVector, TextFeatError> {
        extract_features(text, self.lexica, self.toxicity)
    }

    pub fn feature_schema(&self) -> Vec<String> {
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
    }
}
