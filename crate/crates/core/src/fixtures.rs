//! Synthetic corpus generation for tests, demos, and offline smoke runs.
//!
//! The generated texts are not natural language, but they exercise every
//! feature the pipeline measures: casual human-style texts carry commas,
//! emoji, hedges, mentions, hashtags, and sentiment words; formal
//! machine-style texts are Title Case, comma-free, and emoji-free.

use std::path::Path;

use crate::corpus::{Corpus, CorpusError, Platform, Reply, Source, Split};
use crate::rng::{mix_seed, Rng};

const TOPICS: [&str; 16] = [
    "budget", "election", "concert", "playoffs", "transit", "weather", "festival", "startup",
    "museum", "bakery", "library", "marathon", "housing", "recycling", "broadband", "parade",
];

const CASUAL_OPENERS: [&str; 10] = [
    "honestly", "ok so", "tbh", "wow", "yeah", "ngl", "lol", "right", "well", "omg",
];

const CASUAL_COMMENTS: [&str; 10] = [
    "that was wild", "i loved every second", "no way that happened", "what a mess",
    "so good to see", "still thinking about it", "can we talk about this", "made my whole day",
    "i have questions", "never saw that coming",
];

const SENTIMENT_WORDS: [&str; 10] = [
    "great", "love", "happy", "awesome", "sad", "angry", "terrible", "wonderful", "boring",
    "excited",
];

const HEDGES: [&str; 6] = ["maybe", "probably", "kinda", "sorta", "perhaps", "apparently"];

const EMOJI: [&str; 6] = ["😀", "🎉", "😅", "🙃", "🔥", "✨"];

fn pick<'a>(rng: &mut Rng, opts: &[&'a str]) -> &'a str {
    opts[rng.gen_range(opts.len() as u64) as usize]
}

/// One casual human-style text built from a seeded generator.
pub fn casual_text(rng: &mut Rng) -> String {
    let topic = pick(rng, &TOPICS);
    let mut text = format!(
        "{}, the {topic} {}",
        pick(rng, &CASUAL_OPENERS),
        pick(rng, &CASUAL_COMMENTS),
    );
    if rng.gen_range(3) == 0 {
        text.push_str(&format!(", {} {}", pick(rng, &HEDGES), pick(rng, &SENTIMENT_WORDS)));
    }
    if rng.gen_range(4) == 0 {
        text.push_str(&format!(" @{}fan", pick(rng, &TOPICS)));
    }
    if rng.gen_range(4) == 0 {
        text.push_str(&format!(" #{topic}"));
    }
    if rng.gen_range(2) == 0 {
        text.push_str(&format!(" {}", pick(rng, &EMOJI)));
    }
    text
}

/// One formal machine-style text: Title Case, no commas, no emoji.
pub fn formal_text(rng: &mut Rng) -> String {
    let topic = pick(rng, &TOPICS);
    let frames = [
        format!("The {topic} Initiative Will Be Reviewed In Due Course"),
        format!("It Remains Essential That The {topic} Plan Proceeds"),
        format!("Stakeholders Continue To Monitor The {topic} Situation Closely"),
        format!("A Comprehensive Assessment Of The {topic} Program Is Underway"),
    ];
    frames[rng.gen_range(frames.len() as u64) as usize].clone()
}

/// A batch of casual human-style texts.
pub fn casual_texts(n: usize, seed: u64) -> Vec<String> {
    let mut rng = Rng::new(seed);
    (0..n).map(|_| casual_text(&mut rng)).collect()
}

/// A parent message for replies to respond to.
pub fn parent_text(rng: &mut Rng) -> String {
    let topic = pick(rng, &TOPICS);
    format!(
        "big {topic} news today, what does everyone think about the {topic} announcement?"
    )
}

#[derive(Debug, Clone, Copy)]
pub struct FixtureSpec {
    pub n_users: usize,
    pub train_per_user: usize,
    pub test_per_user: usize,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            n_users: 50,
            train_per_user: 30,
            test_per_user: 25,
            seed: 7,
        }
    }
}

/// Build a synthetic all-human corpus with per-user train/test replies.
pub fn synthetic_corpus(spec: &FixtureSpec) -> Corpus {
    let mut replies = Vec::new();
    for u in 0..spec.n_users {
        let user_id = format!("user-{u:03}");
        let mut rng = Rng::new(mix_seed(spec.seed, &user_id));
        for (split, count, tag) in [
            (Split::Train, spec.train_per_user, "tr"),
            (Split::Test, spec.test_per_user, "te"),
        ] {
            for i in 0..count {
                replies.push(Reply {
                    id: format!("{user_id}-{tag}{i:03}"),
                    user_id: user_id.clone(),
                    platform: Platform::Twitter,
                    parent_text: parent_text(&mut rng),
                    text: casual_text(&mut rng),
                    split,
                    source: Source::Human,
                });
            }
        }
    }
    Corpus::from_replies(Platform::Twitter, replies, "synthetic fixture".to_string())
        .expect("fixture corpus is valid")
}

/// Write a synthetic corpus fixture as JSONL.
pub fn write_fixture(path: &Path, spec: &FixtureSpec) -> Result<(), CorpusError> {
    synthetic_corpus(spec).write_jsonl(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ingest_corpus;

    #[test]
    fn fixture_shape_matches_spec() {
        let spec = FixtureSpec {
            n_users: 5,
            train_per_user: 4,
            test_per_user: 3,
            seed: 1,
        };
        let corpus = synthetic_corpus(&spec);
        assert_eq!(corpus.n_users(), 5);
        assert_eq!(corpus.replies().len(), 5 * 7);
        for user in corpus.users() {
            assert_eq!(user.train_reply_ids.len(), 4);
            assert_eq!(user.test_reply_ids.len(), 3);
        }
    }

    #[test]
    fn fixture_roundtrips_through_ingest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fixture.jsonl");
        let spec = FixtureSpec {
            n_users: 3,
            train_per_user: 2,
            test_per_user: 2,
            seed: 9,
        };
        write_fixture(&path, &spec).unwrap();
        let report = ingest_corpus(&path).unwrap();
        assert!(report.warnings.is_empty());
        assert_eq!(report.corpus.replies().len(), 12);
    }

    #[test]
    fn fixture_is_deterministic() {
        let spec = FixtureSpec::default();
        assert_eq!(synthetic_corpus(&spec), synthetic_corpus(&spec));
    }

    #[test]
    fn styles_differ() {
        let mut rng = Rng::new(3);
        let casual: Vec<String> = (0..20).map(|_| casual_text(&mut rng)).collect();
        let formal: Vec<String> = (0..20).map(|_| formal_text(&mut rng)).collect();
        assert!(casual.iter().filter(|t| t.contains(',')).count() >= 15);
        assert!(formal.iter().all(|t| !t.contains(',')));
        assert!(formal.iter().all(|t| !t.contains('😀')));
    }
}
