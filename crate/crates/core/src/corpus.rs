//! Reply corpora: ingestion, user bookkeeping, evaluation sampling, and
//! balanced human/AI dataset assembly.
//!
//! The on-disk format is JSON Lines, one reply per line:
//!
//! ```text
//! {"id": "t1", "user_id": "u1", "platform": "twitter", "parent_text": "...",
//!  "text": "...", "split": "train", "source": "human"}
//! ```
//!
//! `source` is either the string `"human"` or an object
//! `{"model": "...", "config": "..."}` for machine-generated replies.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{mix_seed, Rng};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Platform {
    Twitter,
    Bluesky,
    Reddit,
    Other(String),
}

impl From<String> for Platform {
    fn from(s: String) -> Self {
        match s.as_str() {
            "twitter" => Platform::Twitter,
            "bluesky" => Platform::Bluesky,
            "reddit" => Platform::Reddit,
            _ => Platform::Other(s),
        }
    }
}

impl From<Platform> for String {
    fn from(p: Platform) -> String {
        p.name().to_string()
    }
}

impl Platform {
    pub fn name(&self) -> &str {
        match self {
            Platform::Twitter => "twitter",
            Platform::Bluesky => "bluesky",
            Platform::Reddit => "reddit",
            Platform::Other(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
enum SourceRepr {
    Tag(String),
    Generated { model: String, config: String },
}

/// Who authored a reply.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SourceRepr", into = "SourceRepr")]
pub enum Source {
    Human,
    Generated { model: String, config: String },
}

impl TryFrom<SourceRepr> for Source {
    type Error = String;
    fn try_from(r: SourceRepr) -> Result<Self, String> {
        match r {
            SourceRepr::Tag(s) if s == "human" => Ok(Source::Human),
            SourceRepr::Tag(s) => Err(format!("unknown source tag {s:?} (expected \"human\")")),
            SourceRepr::Generated { model, config } => Ok(Source::Generated { model, config }),
        }
    }
}

impl From<Source> for SourceRepr {
    fn from(s: Source) -> SourceRepr {
        match s {
            Source::Human => SourceRepr::Tag("human".to_string()),
            Source::Generated { model, config } => SourceRepr::Generated { model, config },
        }
    }
}

/// One social-media message: a reply, the message it replies to, and who
/// wrote it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub id: String,
    pub user_id: String,
    pub platform: Platform,
    pub parent_text: String,
    pub text: String,
    pub split: Split,
    pub source: Source,
}

/// Per-user view over a corpus. The persona is absent until synthesized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub platform: Platform,
    pub train_reply_ids: Vec<String>,
    pub test_reply_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persona: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    platform: Platform,
    replies: Vec<Reply>,
    by_id: HashMap<String, usize>,
    users: BTreeMap<String, UserProfile>,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordError {
    pub line: usize,
    pub message: String,
}

fn format_record_errors(errors: &[RecordError]) -> String {
    errors
        .iter()
        .map(|e| format!("line {}: {}", e.line, e.message))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{n} invalid record(s):\n{detail}", n = errors.len(), detail = format_record_errors(errors))]
    InvalidRecords { errors: Vec<RecordError> },
    #[error("reply {reply_id} references unknown user {user_id}")]
    DanglingUser { reply_id: String, user_id: String },
    #[error("user {user_id} references unknown reply {reply_id}")]
    DanglingReply { user_id: String, reply_id: String },
    #[error("no users qualify (need at least {min} test replies)")]
    NoQualifyingUsers { min: usize },
    #[error("balanced set needs {needed} human replies but the pool has {available}")]
    InsufficientPool { needed: usize, available: usize },
    #[error("cannot build a balanced set from an empty AI text list")]
    EmptyAiList,
    #[error("val_fraction {fraction} leaves the {side} side empty")]
    DegenerateSplit { fraction: f64, side: &'static str },
    #[error("unknown user {0}")]
    UnknownUser(String),
    #[error("{0}")]
    InvalidArgument(String),
}

/// Result of a successful ingest: the corpus plus non-fatal warnings.
#[derive(Debug)]
pub struct IngestReport {
    pub corpus: Corpus,
    pub warnings: Vec<String>,
}

/// Read a JSONL corpus file, validate every record, and derive user
/// profiles. Any malformed, duplicate, or empty-human-text record fails the
/// whole ingest with a line-numbered error list.
pub fn ingest_corpus(path: &Path) -> Result<IngestReport, CorpusError> {
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut replies = Vec::new();
    let mut seen_ids = HashSet::new();
    let mut errors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let reply: Reply = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                errors.push(RecordError {
                    line: line_no,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if !seen_ids.insert(reply.id.clone()) {
            errors.push(RecordError {
                line: line_no,
                message: format!("duplicate reply id {}", reply.id),
            });
            continue;
        }
        if reply.source == Source::Human && reply.text.trim().is_empty() {
            errors.push(RecordError {
                line: line_no,
                message: format!("human reply {} has empty text", reply.id),
            });
            continue;
        }
        replies.push(reply);
    }
    if !errors.is_empty() {
        return Err(CorpusError::InvalidRecords { errors });
    }

    let mut warnings = Vec::new();
    if replies.is_empty() {
        warnings.push("corpus file contains no records".to_string());
    }
    let platform = replies
        .first()
        .map(|r| r.platform.clone())
        .unwrap_or_else(|| Platform::Other("unknown".to_string()));
    if replies.iter().any(|r| r.platform != platform) {
        warnings.push("corpus mixes platforms; using the first record's platform".to_string());
    }

    let corpus = Corpus::from_replies(platform, replies, String::new())?;
    Ok(IngestReport { corpus, warnings })
}

impl Corpus {
    /// Build a corpus from replies alone, deriving user profiles.
    pub fn from_replies(
        platform: Platform,
        replies: Vec<Reply>,
        provenance: String,
    ) -> Result<Self, CorpusError> {
        let mut users: BTreeMap<String, UserProfile> = BTreeMap::new();
        for reply in &replies {
            let user = users
                .entry(reply.user_id.clone())
                .or_insert_with(|| UserProfile {
                    user_id: reply.user_id.clone(),
                    platform: reply.platform.clone(),
                    train_reply_ids: Vec::new(),
                    test_reply_ids: Vec::new(),
                    persona: None,
                });
            match reply.split {
                Split::Train => user.train_reply_ids.push(reply.id.clone()),
                Split::Test => user.test_reply_ids.push(reply.id.clone()),
            }
        }
        Corpus::from_parts(platform, replies, users, provenance)
    }

    /// Build a corpus from explicit parts, validating that every reference
    /// resolves in both directions.
    pub fn from_parts(
        platform: Platform,
        replies: Vec<Reply>,
        users: BTreeMap<String, UserProfile>,
        provenance: String,
    ) -> Result<Self, CorpusError> {
        let mut by_id = HashMap::with_capacity(replies.len());
        for (i, reply) in replies.iter().enumerate() {
            if by_id.insert(reply.id.clone(), i).is_some() {
                return Err(CorpusError::InvalidRecords {
                    errors: vec![RecordError {
                        line: i + 1,
                        message: format!("duplicate reply id {}", reply.id),
                    }],
                });
            }
        }
        for reply in &replies {
            if !users.contains_key(&reply.user_id) {
                return Err(CorpusError::DanglingUser {
                    reply_id: reply.id.clone(),
                    user_id: reply.user_id.clone(),
                });
            }
        }
        for user in users.values() {
            for rid in user.train_reply_ids.iter().chain(&user.test_reply_ids) {
                if !by_id.contains_key(rid) {
                    return Err(CorpusError::DanglingReply {
                        user_id: user.user_id.clone(),
                        reply_id: rid.clone(),
                    });
                }
            }
        }
        Ok(Corpus {
            platform,
            replies,
            by_id,
            users,
            provenance,
        })
    }

    pub fn platform(&self) -> &Platform {
        &self.platform
    }

    pub fn replies(&self) -> &[Reply] {
        &self.replies
    }

    pub fn reply(&self, id: &str) -> Option<&Reply> {
        self.by_id.get(id).map(|&i| &self.replies[i])
    }

    pub fn users(&self) -> impl Iterator<Item = &UserProfile> {
        self.users.values()
    }

    pub fn user(&self, user_id: &str) -> Option<&UserProfile> {
        self.users.get(user_id)
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    /// Human-authored replies from the training split; the sampling pool
    /// for balanced sets.
    pub fn human_train_pool(&self) -> Vec<&Reply> {
        self.replies
            .iter()
            .filter(|r| r.source == Source::Human && r.split == Split::Train)
            .collect()
    }

    /// Attach a synthesized persona to a user.
    pub fn set_persona(&mut self, user_id: &str, persona: String) -> Result<(), CorpusError> {
        match self.users.get_mut(user_id) {
            Some(u) => {
                u.persona = Some(persona);
                Ok(())
            }
            None => Err(CorpusError::UnknownUser(user_id.to_string())),
        }
    }

    /// Write the corpus back out as JSONL, one reply per line, LF endings.
    pub fn write_jsonl(&self, path: &Path) -> Result<(), CorpusError> {
        let mut out = std::fs::File::create(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        for reply in &self.replies {
            let line = serde_json::to_string(reply).expect("reply serialization cannot fail");
            writeln!(out, "{line}").map_err(|source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        Ok(())
    }

    /// Write `{"user_id", "persona"}` JSONL for every user with a persona.
    pub fn write_personas(&self, path: &Path) -> Result<(), CorpusError> {
        let mut out = std::fs::File::create(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        for user in self.users.values() {
            if let Some(p) = &user.persona {
                let rec = serde_json::json!({"user_id": user.user_id, "persona": p});
                writeln!(out, "{rec}").map_err(|source| CorpusError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
        }
        Ok(())
    }

    /// Load personas written by [`Corpus::write_personas`].
    pub fn load_personas(&mut self, path: &Path) -> Result<usize, CorpusError> {
        #[derive(Deserialize)]
        struct Rec {
            user_id: String,
            persona: String,
        }
        let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut n = 0;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Rec = serde_json::from_str(&line).map_err(|e| CorpusError::InvalidRecords {
                errors: vec![RecordError {
                    line: idx + 1,
                    message: e.to_string(),
                }],
            })?;
            self.set_persona(&rec.user_id, rec.persona)?;
            n += 1;
        }
        Ok(n)
    }
}

/// Select evaluation users and sample test replies for each.
///
/// Users need at least `min_test_replies` test replies to qualify; from each
/// qualifying user exactly `per_user` test replies are drawn uniformly
/// without replacement. Sampling is keyed by `(seed, user_id)` so the result
/// does not depend on user iteration order.
pub fn sample_eval_users(
    corpus: &Corpus,
    min_test_replies: usize,
    per_user: usize,
    max_users: Option<usize>,
    seed: u64,
) -> Result<Vec<(String, Vec<String>)>, CorpusError> {
    if per_user == 0 || min_test_replies < per_user {
        return Err(CorpusError::InvalidArgument(format!(
            "need min_test_replies >= per_user >= 1, got {min_test_replies} and {per_user}"
        )));
    }
    let mut qualifying: Vec<&UserProfile> = corpus
        .users()
        .filter(|u| u.test_reply_ids.len() >= min_test_replies)
        .collect();
    if qualifying.is_empty() {
        return Err(CorpusError::NoQualifyingUsers {
            min: min_test_replies,
        });
    }
    if let Some(m) = max_users {
        if m < qualifying.len() {
            let mut rng = Rng::new(mix_seed(seed, "eval-users"));
            let mut keep = rng.sample_indices(qualifying.len(), m);
            keep.sort_unstable();
            qualifying = keep.into_iter().map(|i| qualifying[i]).collect();
        }
    }
    let mut out = Vec::with_capacity(qualifying.len());
    for user in qualifying {
        let mut rng = Rng::new(mix_seed(seed, &user.user_id));
        let idx = rng.sample_indices(user.test_reply_ids.len(), per_user);
        let ids: Vec<String> = idx
            .into_iter()
            .map(|i| user.test_reply_ids[i].clone())
            .collect();
        out.push((user.user_id.clone(), ids));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Human,
    Ai,
}

/// Equal-count labeled human/AI texts for detector training and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedSet {
    pub items: Vec<(String, Label)>,
    pub seed: u64,
}

impl BalancedSet {
    pub fn label_counts(&self) -> (usize, usize) {
        let ai = self.items.iter().filter(|(_, l)| *l == Label::Ai).count();
        (self.items.len() - ai, ai)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Pair every AI text with a human reply sampled uniformly without
/// replacement from `human_pool`, then shuffle. The result always has
/// exactly as many human items as AI items.
pub fn build_balanced_set(
    ai_texts: &[String],
    human_pool: &[&Reply],
    seed: u64,
) -> Result<BalancedSet, CorpusError> {
    if ai_texts.is_empty() {
        return Err(CorpusError::EmptyAiList);
    }
    if human_pool.len() < ai_texts.len() {
        return Err(CorpusError::InsufficientPool {
            needed: ai_texts.len(),
            available: human_pool.len(),
        });
    }
    let mut rng = Rng::new(seed);
    let human_idx = rng.sample_indices(human_pool.len(), ai_texts.len());
    let mut items: Vec<(String, Label)> = Vec::with_capacity(2 * ai_texts.len());
    items.extend(ai_texts.iter().map(|t| (t.clone(), Label::Ai)));
    items.extend(
        human_idx
            .into_iter()
            .map(|i| (human_pool[i].text.clone(), Label::Human)),
    );
    rng.shuffle(&mut items);
    Ok(BalancedSet { items, seed })
}

/// Split a balanced set into train and validation halves, preserving label
/// balance in each half to within one item.
pub fn split_train_val(
    set: &BalancedSet,
    val_fraction: f64,
    seed: u64,
) -> Result<(BalancedSet, BalancedSet), CorpusError> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(CorpusError::InvalidArgument(format!(
            "val_fraction must be in (0,1), got {val_fraction}"
        )));
    }
    let mut rng = Rng::new(seed);
    let mut train_items = Vec::new();
    let mut val_items = Vec::new();
    for label in [Label::Human, Label::Ai] {
        let mut idx: Vec<usize> = set
            .items
            .iter()
            .enumerate()
            .filter(|(_, (_, l))| *l == label)
            .map(|(i, _)| i)
            .collect();
        let n_val = (idx.len() as f64 * val_fraction).round() as usize;
        let mut fork = rng.fork();
        fork.shuffle(&mut idx);
        for (k, i) in idx.into_iter().enumerate() {
            if k < n_val {
                val_items.push(set.items[i].clone());
            } else {
                train_items.push(set.items[i].clone());
            }
        }
    }
    if train_items.is_empty() {
        return Err(CorpusError::DegenerateSplit {
            fraction: val_fraction,
            side: "train",
        });
    }
    if val_items.is_empty() {
        return Err(CorpusError::DegenerateSplit {
            fraction: val_fraction,
            side: "validation",
        });
    }
    rng.fork().shuffle(&mut train_items);
    rng.fork().shuffle(&mut val_items);
    Ok((
        BalancedSet {
            items: train_items,
            seed,
        },
        BalancedSet {
            items: val_items,
            seed,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, user: &str, split: &str, text: &str) -> String {
        format!(
            r#"{{"id":"{id}","user_id":"{user}","platform":"twitter","parent_text":"parent","text":"{text}","split":"{split}","source":"human"}}"#
        )
    }

    fn write_corpus(lines: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn ingest_counts_replies_and_users() {
        let f = write_corpus(&[
            record("a", "u1", "train", "hello"),
            record("b", "u1", "test", "again"),
            record("c", "u2", "train", "hi"),
        ]);
        let report = ingest_corpus(f.path()).unwrap();
        assert_eq!(report.corpus.replies().len(), 3);
        assert_eq!(report.corpus.n_users(), 2);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn ingest_empty_file_warns() {
        let f = write_corpus(&[]);
        let report = ingest_corpus(f.path()).unwrap();
        assert_eq!(report.corpus.replies().len(), 0);
        assert_eq!(report.corpus.n_users(), 0);
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn ingest_names_the_bad_line() {
        let bad = r#"{"id":"b","user_id":"u1","platform":"twitter","parent_text":"p","split":"train","source":"human"}"#;
        let f = write_corpus(&[
            record("a", "u1", "train", "hello"),
            bad.to_string(),
            record("c", "u2", "train", "hi"),
        ]);
        let err = ingest_corpus(f.path()).unwrap_err();
        match err {
            CorpusError::InvalidRecords { errors } => {
                assert_eq!(errors.len(), 1);
                assert_eq!(errors[0].line, 2);
                assert!(errors[0].message.contains("text"), "{}", errors[0].message);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_empty_human_text_and_duplicates() {
        let f = write_corpus(&[
            record("a", "u1", "train", "  "),
            record("a", "u1", "train", "dup id"),
        ]);
        let err = ingest_corpus(f.path()).unwrap_err();
        match err {
            CorpusError::InvalidRecords { errors } => {
                assert_eq!(errors.len(), 2);
                assert_eq!(errors[0].line, 1);
                assert!(errors[1].message.contains("duplicate"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn roundtrip_preserves_corpus() {
        let f = write_corpus(&[
            record("a", "u1", "train", "hello"),
            record("b", "u1", "test", "again"),
            record("c", "u2", "train", "hi"),
        ]);
        let first = ingest_corpus(f.path()).unwrap().corpus;
        let out = tempfile::NamedTempFile::new().unwrap();
        first.write_jsonl(out.path()).unwrap();
        let second = ingest_corpus(out.path()).unwrap().corpus;
        assert_eq!(first, second);
    }

    fn corpus_with_test_replies(counts: &[(&str, usize)]) -> Corpus {
        let mut lines = Vec::new();
        for (user, n) in counts {
            for i in 0..*n {
                lines.push(record(&format!("{user}-{i}"), user, "test", "msg"));
            }
            lines.push(record(&format!("{user}-train"), user, "train", "t"));
        }
        let f = write_corpus(&lines);
        ingest_corpus(f.path()).unwrap().corpus
    }

    #[test]
    fn sample_eval_users_threshold_and_count() {
        let corpus = corpus_with_test_replies(&[("alice", 25), ("bob", 19)]);
        let picks = sample_eval_users(&corpus, 20, 20, None, 7).unwrap();
        assert_eq!(picks.len(), 1);
        assert_eq!(picks[0].0, "alice");
        assert_eq!(picks[0].1.len(), 20);
        let mut uniq = picks[0].1.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 20);
    }

    #[test]
    fn sample_eval_users_deterministic() {
        let corpus = corpus_with_test_replies(&[("alice", 30), ("bob", 30)]);
        let a = sample_eval_users(&corpus, 20, 20, None, 99).unwrap();
        let b = sample_eval_users(&corpus, 20, 20, None, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_eval_users_no_qualifiers() {
        let corpus = corpus_with_test_replies(&[("alice", 3)]);
        assert!(matches!(
            sample_eval_users(&corpus, 20, 20, None, 1),
            Err(CorpusError::NoQualifyingUsers { .. })
        ));
    }

    fn human_pool(n: usize) -> Vec<Reply> {
        (0..n)
            .map(|i| Reply {
                id: format!("h{i}"),
                user_id: "u".to_string(),
                platform: Platform::Twitter,
                parent_text: String::new(),
                text: format!("human text {i}"),
                split: Split::Train,
                source: Source::Human,
            })
            .collect()
    }

    #[test]
    fn balanced_set_has_equal_labels() {
        let pool = human_pool(5000);
        let pool_refs: Vec<&Reply> = pool.iter().collect();
        let ai: Vec<String> = (0..120).map(|i| format!("ai text {i}")).collect();
        let set = build_balanced_set(&ai, &pool_refs, 11).unwrap();
        assert_eq!(set.len(), 240);
        assert_eq!(set.label_counts(), (120, 120));
    }

    #[test]
    fn balanced_set_insufficient_pool() {
        let pool = human_pool(80);
        let pool_refs: Vec<&Reply> = pool.iter().collect();
        let ai: Vec<String> = (0..120).map(|i| format!("ai {i}")).collect();
        assert!(matches!(
            build_balanced_set(&ai, &pool_refs, 1),
            Err(CorpusError::InsufficientPool { .. })
        ));
        assert!(matches!(
            build_balanced_set(&[], &pool_refs, 1),
            Err(CorpusError::EmptyAiList)
        ));
    }

    #[test]
    fn balanced_set_deterministic() {
        let pool = human_pool(500);
        let pool_refs: Vec<&Reply> = pool.iter().collect();
        let ai: Vec<String> = (0..120).map(|i| format!("ai {i}")).collect();
        let a = build_balanced_set(&ai, &pool_refs, 42).unwrap();
        let b = build_balanced_set(&ai, &pool_refs, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_preserves_balance() {
        let pool = human_pool(500);
        let pool_refs: Vec<&Reply> = pool.iter().collect();
        let ai: Vec<String> = (0..120).map(|i| format!("ai {i}")).collect();
        let set = build_balanced_set(&ai, &pool_refs, 42).unwrap();
        let (train, val) = split_train_val(&set, 0.2, 7).unwrap();
        assert_eq!(train.len(), 192);
        assert_eq!(val.len(), 48);
        assert_eq!(val.label_counts(), (24, 24));
        assert_eq!(train.label_counts(), (96, 96));
        // Disjoint union equals input.
        let mut all: Vec<_> = train.items.iter().chain(&val.items).cloned().collect();
        all.sort();
        let mut orig = set.items.clone();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn split_tiny_and_degenerate() {
        let pool = human_pool(10);
        let pool_refs: Vec<&Reply> = pool.iter().collect();
        let ai: Vec<String> = (0..2).map(|i| format!("ai {i}")).collect();
        let set = build_balanced_set(&ai, &pool_refs, 1).unwrap();
        let (train, val) = split_train_val(&set, 0.5, 1).unwrap();
        assert_eq!(train.label_counts(), (1, 1));
        assert_eq!(val.label_counts(), (1, 1));

        let ai: Vec<String> = (0..5).map(|i| format!("ai {i}")).collect();
        let set = build_balanced_set(&ai, &pool_refs, 1).unwrap();
        assert!(matches!(
            split_train_val(&set, 0.999, 1),
            Err(CorpusError::DegenerateSplit { side: "train", .. })
        ));
    }
}
