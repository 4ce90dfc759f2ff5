//! Topical signal extraction and AI-vs-human divergence testing.
//!
//! Each text gets a per-category signal: the fraction of its word tokens
//! matching any of the category's terms. Category signal distributions of
//! the AI and human samples are compared with the Wilcoxon rank-sum test,
//! and the per-category p-values are corrected jointly with
//! Benjamini-Hochberg FDR.

pub mod lexicon;
pub mod stat;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textfeat::tokenize::tokenize;
pub use lexicon::{Term, TopicLexicon, TopicLexiconError};
pub use stat::{bh_fdr, wilcoxon_rank_sum, WilcoxonResult, EXACT_LIMIT};

#[derive(Debug, Error)]
pub enum TopicsError {
    #[error("the {0} text sample is empty")]
    EmptySample(&'static str),
    #[error(transparent)]
    Lexicon(#[from] TopicLexiconError),
}

/// Per-category signal scores for one text, each in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSignal {
    pub scores: BTreeMap<String, f64>,
}

/// Token-to-category matcher built once per lexicon.
struct TopicMatcher<'a> {
    category_names: Vec<&'a str>,
    exact: HashMap<&'a str, Vec<usize>>,
    prefixes: Vec<(&'a str, usize)>,
}

impl<'a> TopicMatcher<'a> {
    fn new(lexicon: &'a TopicLexicon) -> Self {
        let mut category_names = Vec::with_capacity(lexicon.categories.len());
        let mut exact: HashMap<&str, Vec<usize>> = HashMap::new();
        let mut prefixes = Vec::new();
        for (idx, (name, terms)) in lexicon.categories.iter().enumerate() {
            category_names.push(name.as_str());
            for term in terms {
                if term.prefix {
                    prefixes.push((term.text.as_str(), idx));
                } else {
                    exact.entry(term.text.as_str()).or_default().push(idx);
                }
            }
        }
        TopicMatcher {
            category_names,
            exact,
            prefixes,
        }
    }

    /// Per-category matched-token counts for a token sequence.
    fn count(&self, words: &[String]) -> Vec<u32> {
        let mut counts = vec![0u32; self.category_names.len()];
        for word in words {
            let mut hit = vec![false; counts.len()];
            if let Some(cats) = self.exact.get(word.as_str()) {
                for &c in cats {
                    hit[c] = true;
                }
            }
            for (prefix, c) in &self.prefixes {
                if word.starts_with(prefix) {
                    hit[*c] = true;
                }
            }
            for (c, h) in hit.iter().enumerate() {
                if *h {
                    counts[c] += 1;
                }
            }
        }
        counts
    }
}

/// Per-category signals for one text: matched tokens / total word tokens.
pub fn topic_signals(text: &str, lexicon: &TopicLexicon) -> TopicSignal {
    let matcher = TopicMatcher::new(lexicon);
    let words = tokenize(text).words;
    let counts = matcher.count(&words);
    let denom = words.len().max(1) as f64;
    let scores = matcher
        .category_names
        .iter()
        .zip(counts)
        .map(|(name, c)| (name.to_string(), f64::from(c) / denom))
        .collect();
    TopicSignal { scores }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AiHigher,
    HumanHigher,
    None,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::AiHigher => "ai_higher",
            Direction::HumanHigher => "human_higher",
            Direction::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: String,
    pub u_statistic: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub significant: bool,
    pub direction: Direction,
    pub n_ai: usize,
    pub n_human: usize,
}

/// Per-category divergence test results, rows sorted by category name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub rows: Vec<CategoryRow>,
    pub alpha: f64,
    pub lexicon_version: String,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn direction_of(ai: &[f64], human: &[f64]) -> Direction {
    let mut a = ai.to_vec();
    let mut h = human.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    h.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let (ma, mh) = (median(&a), median(&h));
    if ma > mh {
        return Direction::AiHigher;
    }
    if mh > ma {
        return Direction::HumanHigher;
    }
    // Median tie: fall back to means.
    let mean_a = ai.iter().sum::<f64>() / ai.len() as f64;
    let mean_h = human.iter().sum::<f64>() / human.len() as f64;
    if mean_a > mean_h {
        Direction::AiHigher
    } else if mean_h > mean_a {
        Direction::HumanHigher
    } else {
        Direction::None
    }
}

/// Test every category for AI-vs-human signal divergence with joint FDR
/// correction at `alpha`.
pub fn divergence_report(
    ai_texts: &[String],
    human_texts: &[String],
    lexicon: &TopicLexicon,
    alpha: f64,
) -> Result<DivergenceReport, TopicsError> {
    if ai_texts.is_empty() {
        return Err(TopicsError::EmptySample("ai"));
    }
    if human_texts.is_empty() {
        return Err(TopicsError::EmptySample("human"));
    }
    let matcher = TopicMatcher::new(lexicon);
    let n_cats = matcher.category_names.len();

    let signals_for = |texts: &[String]| -> Vec<Vec<f64>> {
        // signals[cat][text]
        let mut per_cat = vec![Vec::with_capacity(texts.len()); n_cats];
        for text in texts {
            let words = tokenize(text).words;
            let counts = matcher.count(&words);
            let denom = words.len().max(1) as f64;
            for (c, count) in counts.into_iter().enumerate() {
                per_cat[c].push(f64::from(count) / denom);
            }
        }
        per_cat
    };
    let ai_signals = signals_for(ai_texts);
    let human_signals = signals_for(human_texts);

    let mut tests = Vec::with_capacity(n_cats);
    for c in 0..n_cats {
        tests.push(wilcoxon_rank_sum(&ai_signals[c], &human_signals[c]));
    }
    let p_raw: Vec<f64> = tests.iter().map(|t| t.p).collect();
    let corrected = bh_fdr(&p_raw, alpha);

    let rows = (0..n_cats)
        .map(|c| CategoryRow {
            category: matcher.category_names[c].to_string(),
            u_statistic: tests[c].u,
            p_raw: tests[c].p,
            p_adjusted: corrected[c].0,
            significant: corrected[c].1,
            direction: direction_of(&ai_signals[c], &human_signals[c]),
            n_ai: ai_texts.len(),
            n_human: human_texts.len(),
        })
        .collect();
    Ok(DivergenceReport {
        rows,
        alpha,
        lexicon_version: lexicon.version.clone(),
    })
}

impl DivergenceReport {
    pub fn significant_categories(&self) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.significant)
            .map(|r| r.category.as_str())
            .collect()
    }

    /// CSV export: category, u, p_raw, p_adjusted, significant, direction.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,u,p_raw,p_adjusted,significant,direction\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.category,
                crate::report::format_float(row.u_statistic),
                crate::report::format_float(row.p_raw),
                crate::report::format_float(row.p_adjusted),
                row.significant,
                row.direction.as_str()
            ));
        }
        out
    }
}

/// Rank categories by how many models flag them significant, ties broken
/// alphabetically, truncated to `k`. Categories no model flags are omitted.
pub fn top_k_common_divergent(
    reports: &BTreeMap<String, DivergenceReport>,
    k: usize,
) -> Vec<(String, Vec<String>)> {
    let mut by_category: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (model_id, report) in reports {
        for cat in report.significant_categories() {
            by_category
                .entry(cat.to_string())
                .or_default()
                .push(model_id.clone());
        }
    }
    let mut ranked: Vec<(String, Vec<String>)> = by_category.into_iter().collect();
    // BTreeMap iteration is already alphabetical; stable sort keeps that
    // order within equal counts.
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()));
    ranked.truncate(k);
    ranked
}

/// Plot-ready JSON for a stacked significance-count bar chart.
pub fn divergence_plot_json(
    reports: &BTreeMap<String, DivergenceReport>,
    k: usize,
) -> serde_json::Value {
    let ranked = top_k_common_divergent(reports, k);
    serde_json::json!({
        "kind": "stacked_significance_counts",
        "categories": ranked
            .iter()
            .map(|(cat, models)| {
                serde_json::json!({
                    "category": cat,
                    "n_models": models.len(),
                    "models": models,
                })
            })
            .collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn signal_counts_matching_tokens() {
        let lex = TopicLexicon::parse("conflict: war, fight*\n").unwrap();
        let sig = topic_signals("war war peace", &lex);
        assert!((sig.scores["conflict"] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn prefix_match_counts() {
        let lex = TopicLexicon::parse("conflict: war, fight*\n").unwrap();
        let sig = topic_signals("fighting words", &lex);
        assert!((sig.scores["conflict"] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_text_scores_zero() {
        let lex = TopicLexicon::builtin_demo();
        let sig = topic_signals("", &lex);
        assert!(sig.scores.values().all(|&v| v == 0.0));
        assert_eq!(sig.scores.len(), 20);
    }

    fn word_salad(rng: &mut Rng, n_texts: usize) -> Vec<String> {
        let vocab = [
            "the", "a", "walk", "tree", "river", "stone", "light", "cloud", "paper", "glass",
            "window", "road", "small", "quick", "blue", "green",
        ];
        (0..n_texts)
            .map(|_| {
                let len = 5 + rng.gen_range(10) as usize;
                (0..len)
                    .map(|_| vocab[rng.gen_range(vocab.len() as u64) as usize])
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    }

    #[test]
    fn planted_signal_is_detected_with_direction() {
        let mut rng = Rng::new(5);
        let mut human = word_salad(&mut rng, 15);
        for t in &mut human {
            t.push_str(" happy");
        }
        let ai = word_salad(&mut rng, 15);
        let report =
            divergence_report(&ai, &human, &TopicLexicon::builtin_demo(), 0.05).unwrap();
        let row = report
            .rows
            .iter()
            .find(|r| r.category == "positive_emotion")
            .unwrap();
        assert!(row.significant, "p_adj={}", row.p_adjusted);
        assert_eq!(row.direction, Direction::HumanHigher);
        assert_eq!(row.n_ai, 15);
        assert_eq!(row.n_human, 15);
    }

    #[test]
    fn null_case_rarely_flags_anything() {
        let mut total_flagged = 0;
        for seed in 0..4u64 {
            let mut rng = Rng::new(seed);
            let ai = word_salad(&mut rng, 25);
            let human = word_salad(&mut rng, 25);
            let report =
                divergence_report(&ai, &human, &TopicLexicon::builtin_demo(), 0.05).unwrap();
            total_flagged += report.significant_categories().len();
        }
        assert!(total_flagged <= 2, "flagged {total_flagged} over 4 null runs");
    }

    #[test]
    fn alpha_zero_flags_nothing() {
        let mut rng = Rng::new(1);
        let mut human = word_salad(&mut rng, 12);
        for t in &mut human {
            t.push_str(" happy");
        }
        let ai = word_salad(&mut rng, 12);
        let report = divergence_report(&ai, &human, &TopicLexicon::builtin_demo(), 0.0).unwrap();
        assert!(report.significant_categories().is_empty());
    }

    #[test]
    fn empty_sample_is_an_error() {
        let lex = TopicLexicon::builtin_demo();
        assert!(divergence_report(&[], &["x".into()], &lex, 0.05).is_err());
        assert!(divergence_report(&["x".into()], &[], &lex, 0.05).is_err());
    }

    fn report_flagging(cats: &[&str]) -> DivergenceReport {
        DivergenceReport {
            rows: cats
                .iter()
                .map(|c| CategoryRow {
                    category: c.to_string(),
                    u_statistic: 0.0,
                    p_raw: 0.001,
                    p_adjusted: 0.001,
                    significant: true,
                    direction: Direction::AiHigher,
                    n_ai: 1,
                    n_human: 1,
                })
                .collect(),
            alpha: 0.05,
            lexicon_version: "test".to_string(),
        }
    }

    #[test]
    fn top_k_ranks_by_model_count_then_name() {
        let mut reports = BTreeMap::new();
        reports.insert("m1".to_string(), report_flagging(&["politics", "anger"]));
        reports.insert("m2".to_string(), report_flagging(&["politics", "fear"]));
        reports.insert("m3".to_string(), report_flagging(&["politics"]));
        let ranked = top_k_common_divergent(&reports, 20);
        assert_eq!(ranked[0].0, "politics");
        assert_eq!(ranked[0].1.len(), 3);
        // anger and fear tie at 1 model; alphabetical order breaks the tie.
        assert_eq!(ranked[1].0, "anger");
        assert_eq!(ranked[2].0, "fear");

        let truncated = top_k_common_divergent(&reports, 1);
        assert_eq!(truncated.len(), 1);
    }

    #[test]
    fn top_k_empty_when_nothing_significant() {
        let mut reports = BTreeMap::new();
        reports.insert("m1".to_string(), report_flagging(&[]));
        assert!(top_k_common_divergent(&reports, 20).is_empty());
    }
}
