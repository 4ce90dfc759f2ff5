//! Lexicon-based sentiment with negation handling and compound
//! normalization.
//!
//! Each word token found in the sentiment lexicon contributes its valence;
//! if a negator appears within the three preceding word tokens the valence
//! flips sign. The raw sum `s` is normalized to `s / sqrt(s^2 + 15)`, which
//! maps any sum into (-1, 1). Text with no lexicon hits scores 0.

use std::collections::HashMap;

const NORMALIZATION_ALPHA: f64 = 15.0;
const NEGATION_WINDOW: usize = 3;

const NEGATORS: &[&str] = &[
    "not", "no", "never", "none", "nobody", "nothing", "neither", "nor", "nowhere", "hardly",
    "barely", "scarcely", "without", "cannot",
];

fn is_negator(word: &str) -> bool {
    NEGATORS.contains(&word) || word.ends_with("n't")
}

/// Compound sentiment of a word-token sequence, in [-1, 1].
pub fn compound(words: &[String], valences: &HashMap<String, f64>) -> f64 {
    let mut sum = 0.0;
    let mut any = false;
    for (i, word) in words.iter().enumerate() {
        let Some(&valence) = valences.get(word.as_str()) else {
            continue;
        };
        any = true;
        let window_start = i.saturating_sub(NEGATION_WINDOW);
        let negated = words[window_start..i].iter().any(|w| is_negator(w));
        sum += if negated { -valence } else { valence };
    }
    if !any {
        return 0.0;
    }
    sum / (sum * sum + NORMALIZATION_ALPHA).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textfeat::lexicon::LexiconSet;
    use crate::textfeat::tokenize::tokenize;

    fn score(text: &str) -> f64 {
        compound(&tokenize(text).words, &LexiconSet::builtin().sentiment)
    }

    #[test]
    fn no_hits_scores_zero() {
        assert_eq!(score("the cat sat on the mat"), 0.0);
    }

    #[test]
    fn single_positive_word_normalizes() {
        let expected = 1.9 / (1.9f64 * 1.9 + 15.0).sqrt();
        assert!((score("good") - expected).abs() < 1e-12);
        assert!((expected - 0.4404).abs() < 1e-4);
    }

    #[test]
    fn negation_flips_with_equal_magnitude() {
        let pos = score("good");
        let neg = score("not good");
        assert!((neg + pos).abs() < 1e-12, "pos={pos} neg={neg}");
    }

    #[test]
    fn negation_window_is_three_tokens() {
        // Negator three tokens back still flips...
        assert!(score("never was that good") < 0.0);
        // ...but four tokens back does not.
        assert!(score("never was it that good") > 0.0);
    }

    #[test]
    fn contracted_negation_counts() {
        assert!(score("isn't good") < 0.0);
    }

    #[test]
    fn bounded_for_many_hits() {
        let text = "great great great great great great great great great great";
        let s = score(text);
        assert!(s > 0.9 && s < 1.0);
    }
}
