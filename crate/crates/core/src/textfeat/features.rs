//! The 19 interpretable stylometric, diversity, affective, and syntactic
//! features.
//!
//! Conventions that the numbers depend on:
//! * the input is trimmed first, so leading/trailing whitespace never
//!   changes a value
//! * punctuation means ASCII punctuation or Unicode general category P
//! * uppercase_count counts uppercase letters, not all-caps words
//! * sentence_length_variance is the population variance of per-sentence
//!   word counts; a single sentence yields 0
//! * trigram_repetition_count sums `occurrences - 1` over repeated word
//!   trigrams
//! * perplexity_proxy is the self-entropy of the word distribution in bits
//! * clauses_per_sentence is the mean over sentences of (commas + 1)

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use super::lexicon::LexiconSet;
use super::tokenize::{sentence_words, tokenize};
use super::toxicity::{ToxicityError, ToxicityScorer};

/// Feature names in their fixed export order.
pub const FEATURE_NAMES: [&str; 19] = [
    "word_count",
    "char_count",
    "avg_word_length",
    "sentence_length_variance",
    "punctuation_count",
    "uppercase_count",
    "mention_count",
    "hashtag_count",
    "link_count",
    "emoji_count",
    "transition_word_count",
    "superlative_count",
    "hedge_word_count",
    "type_token_ratio",
    "trigram_repetition_count",
    "perplexity_proxy",
    "sentiment_compound",
    "toxicity",
    "clauses_per_sentence",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub word_count: u32,
    pub char_count: u32,
    pub avg_word_length: f64,
    pub sentence_length_variance: f64,
    pub punctuation_count: u32,
    pub uppercase_count: u32,
    pub mention_count: u32,
    pub hashtag_count: u32,
    pub link_count: u32,
    pub emoji_count: u32,
    pub transition_word_count: u32,
    pub superlative_count: u32,
    pub hedge_word_count: u32,
    pub type_token_ratio: f64,
    pub trigram_repetition_count: u32,
    pub perplexity_proxy: f64,
    pub sentiment_compound: f64,
    pub toxicity: f64,
    pub clauses_per_sentence: f64,
}

impl FeatureVector {
    pub const CSV_HEADER: &'static str = "word_count,char_count,avg_word_length,sentence_length_variance,punctuation_count,uppercase_count,mention_count,hashtag_count,link_count,emoji_count,transition_word_count,superlative_count,hedge_word_count,type_token_ratio,trigram_repetition_count,perplexity_proxy,sentiment_compound,toxicity,clauses_per_sentence";

    /// Values in [`FEATURE_NAMES`] order.
    pub fn as_array(&self) -> [f64; 19] {
        [
            f64::from(self.word_count),
            f64::from(self.char_count),
            self.avg_word_length,
            self.sentence_length_variance,
            f64::from(self.punctuation_count),
            f64::from(self.uppercase_count),
            f64::from(self.mention_count),
            f64::from(self.hashtag_count),
            f64::from(self.link_count),
            f64::from(self.emoji_count),
            f64::from(self.transition_word_count),
            f64::from(self.superlative_count),
            f64::from(self.hedge_word_count),
            self.type_token_ratio,
            self.trigram_repetition_count.into(),
            self.perplexity_proxy,
            self.sentiment_compound,
            self.toxicity,
            self.clauses_per_sentence,
        ]
    }

    pub fn to_csv_row(&self) -> String {
        self.as_array()
            .iter()
            .map(|v| crate::report::format_float(*v))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Error)]
pub enum TextFeatError {
    #[error("toxicity scoring failed (substitute the lexicon fallback to proceed): {0}")]
    Toxicity(#[from] ToxicityError),
}

/// Self-entropy of a word sequence in bits: `-sum p(w) log2 p(w)` over
/// within-text relative frequencies. Zero for empty input or a single
/// distinct word.
pub fn self_entropy(words: &[String]) -> f64 {
    if words.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, u32> = HashMap::new();
    for w in words {
        *counts.entry(w.as_str()).or_insert(0) += 1;
    }
    if counts.len() <= 1 {
        return 0.0;
    }
    // Sum in sorted-count order: HashMap iteration order varies between
    // instances, and float addition is not associative.
    let mut sorted_counts: Vec<u32> = counts.into_values().collect();
    sorted_counts.sort_unstable();
    let n = words.len() as f64;
    let h: f64 = sorted_counts
        .into_iter()
        .map(|c| {
            let p = f64::from(c) / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || c.general_category_group() == GeneralCategoryGroup::Punctuation
}

fn population_variance(xs: &[f64]) -> f64 {
    if xs.len() <= 1 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

/// Compute all 19 features for one text.
pub fn extract_features(
    text: &str,
    lexica: &LexiconSet,
    toxicity_scorer: &dyn ToxicityScorer,
) -> Result<FeatureVector, TextFeatError> {
    let trimmed = text.trim();
    let ts = tokenize(trimmed);
    let words = &ts.words;

    let word_count = words.len() as u32;
    let char_count = trimmed.chars().count() as u32;
    let avg_word_length = if words.is_empty() {
        0.0
    } else {
        words.iter().map(|w| w.chars().count()).sum::<usize>() as f64 / words.len() as f64
    };

    let sentence_word_counts: Vec<f64> = ts
        .sentences
        .iter()
        .map(|s| sentence_words(s).len() as f64)
        .collect();
    let sentence_length_variance = population_variance(&sentence_word_counts);

    let punctuation_count = trimmed.chars().filter(|c| is_punctuation(*c)).count() as u32;
    let uppercase_count = trimmed.chars().filter(|c| c.is_uppercase()).count() as u32;

    let count_in = |set: &std::collections::HashSet<String>| {
        words.iter().filter(|w| set.contains(w.as_str())).count() as u32
    };

    let mut distinct: HashMap<&str, ()> = HashMap::new();
    for w in words {
        distinct.insert(w.as_str(), ());
    }
    let type_token_ratio = if words.is_empty() {
        0.0
    } else {
        distinct.len() as f64 / words.len() as f64
    };

    let mut trigrams: HashMap<(&str, &str, &str), u32> = HashMap::new();
    for window in words.windows(3) {
        *trigrams
            .entry((
                window[0].as_str(),
                window[1].as_str(),
                window[2].as_str(),
            ))
            .or_insert(0) += 1;
    }
    let trigram_repetition_count: u32 = trigrams.values().map(|&c| c.saturating_sub(1)).sum();

    let sentiment_compound = super::sentiment::compound(words, &lexica.sentiment);
    let toxicity = toxicity_scorer.score(trimmed)?.clamp(0.0, 1.0);

    let clauses_per_sentence = if ts.sentences.is_empty() {
        0.0
    } else {
        ts.sentences
            .iter()
            .map(|s| s.chars().filter(|c| *c == ',').count() as f64 + 1.0)
            .sum::<f64>()
            / ts.sentences.len() as f64
    };

    Ok(FeatureVector {
        word_count,
        char_count,
        avg_word_length,
        sentence_length_variance,
        punctuation_count,
        uppercase_count,
        mention_count: ts.mentions.len() as u32,
        hashtag_count: ts.hashtags.len() as u32,
        link_count: ts.urls.len() as u32,
        emoji_count: ts.emojis.len() as u32,
        transition_word_count: count_in(&lexica.transitions),
        superlative_count: count_in(&lexica.superlatives),
        hedge_word_count: count_in(&lexica.hedges),
        type_token_ratio,
        trigram_repetition_count,
        perplexity_proxy: self_entropy(words),
        sentiment_compound,
        toxicity,
        clauses_per_sentence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textfeat::toxicity::LexiconToxicity;

    fn extract(text: &str) -> FeatureVector {
        extract_features(text, LexiconSet::builtin(), &LexiconToxicity::builtin()).unwrap()
    }

    #[test]
    fn hello_world_basics() {
        let fv = extract("Hello world!");
        assert_eq!(fv.word_count, 2);
        assert_eq!(fv.char_count, 12);
        assert_eq!(fv.avg_word_length, 5.0);
        assert_eq!(fv.punctuation_count, 1);
        assert_eq!(fv.uppercase_count, 1);
        assert_eq!(fv.clauses_per_sentence, 1.0);
        assert_eq!(fv.sentence_length_variance, 0.0);
    }

    #[test]
    fn repeated_word_diversity() {
        let fv = extract("the the the the");
        assert_eq!(fv.type_token_ratio, 0.25);
        assert_eq!(fv.trigram_repetition_count, 1);
        assert_eq!(fv.perplexity_proxy, 0.0);
    }

    #[test]
    fn clause_rule_commas_plus_one() {
        let fv = extract("I came, I saw, I conquered.");
        assert_eq!(fv.clauses_per_sentence, 3.0);
    }

    #[test]
    fn entropy_examples() {
        let w = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(self_entropy(&w(&["a", "b", "a", "b"])), 1.0);
        assert_eq!(self_entropy(&w(&["a"])), 0.0);
        assert_eq!(self_entropy(&w(&[])), 0.0);
        assert_eq!(
            self_entropy(&w(&["a", "a", "b", "b", "c", "c", "d", "d"])),
            2.0
        );
    }

    #[test]
    fn trailing_whitespace_is_ignored() {
        let a = extract("Nice day, isn't it? 😀");
        let b = extract("Nice day, isn't it? 😀   \n\t");
        assert_eq!(a, b);
    }

    #[test]
    fn empty_text_is_all_zero() {
        let fv = extract("");
        assert_eq!(fv.word_count, 0);
        assert_eq!(fv.char_count, 0);
        assert_eq!(fv.type_token_ratio, 0.0);
        assert_eq!(fv.clauses_per_sentence, 0.0);
        assert_eq!(fv.sentiment_compound, 0.0);
    }

    #[test]
    fn social_token_counts() {
        let fv = extract("@sam check https://x.co #win 😀");
        assert_eq!(fv.mention_count, 1);
        assert_eq!(fv.link_count, 1);
        assert_eq!(fv.hashtag_count, 1);
        assert_eq!(fv.emoji_count, 1);
        assert_eq!(fv.word_count, 1);
    }

    #[test]
    fn lexicon_counts() {
        let fv = extract("However, maybe this is the best and the greatest. Perhaps.");
        assert_eq!(fv.transition_word_count, 1);
        assert_eq!(fv.hedge_word_count, 2);
        assert_eq!(fv.superlative_count, 2);
    }

    #[test]
    fn csv_row_has_19_columns() {
        let fv = extract("Hello world!");
        assert_eq!(fv.to_csv_row().split(',').count(), 19);
        assert_eq!(FeatureVector::CSV_HEADER.split(',').count(), 19);
        assert_eq!(FEATURE_NAMES.len(), 19);
    }
}
