//! Word lexica backing the lexicon-based features.
//!
//! File format: UTF-8 text, one entry per line, `word<TAB>weight` with the
//! weight optional (default 1.0). Lines starting with `#` are comments; a
//! leading `# version: <tag>` comment names the lexicon version recorded in
//! run manifests. Entries are lowercased on load.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file} line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("lexicon {0} is empty")]
    Empty(String),
}

/// Parsed weighted word list plus its version tag.
#[derive(Debug, Clone)]
pub struct WordList {
    pub entries: HashMap<String, f64>,
    pub version: String,
}

impl WordList {
    pub fn word_set(&self) -> HashSet<String> {
        self.entries.keys().cloned().collect()
    }
}

/// Parse lexicon file content. `name` is used in errors and as the default
/// version prefix.
pub fn parse_word_list(name: &str, content: &str) -> Result<WordList, LexiconError> {
    let mut entries = HashMap::new();
    let mut version = format!("{name}-unversioned");
    for (idx, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("version:") {
                version = v.trim().to_string();
            }
            continue;
        }
        let mut parts = line.splitn(2, '\t');
        let word = parts.next().unwrap().trim().to_lowercase();
        if word.is_empty() {
            return Err(LexiconError::Parse {
                file: name.to_string(),
                line: idx + 1,
                message: "empty entry".to_string(),
            });
        }
        let weight = match parts.next() {
            Some(w) => w.trim().parse::<f64>().map_err(|e| LexiconError::Parse {
                file: name.to_string(),
                line: idx + 1,
                message: format!("bad weight {w:?}: {e}"),
            })?,
            None => 1.0,
        };
        entries.insert(word, weight);
    }
    if entries.is_empty() {
        return Err(LexiconError::Empty(name.to_string()));
    }
    Ok(WordList { entries, version })
}

fn load_word_list(path: &Path) -> Result<WordList, LexiconError> {
    let content = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_word_list(&path.display().to_string(), &content)
}

/// All lexica consumed by feature extraction.
#[derive(Debug, Clone)]
pub struct LexiconSet {
    pub hedges: HashSet<String>,
    pub transitions: HashSet<String>,
    pub superlatives: HashSet<String>,
    pub sentiment: HashMap<String, f64>,
    pub toxicity: HashMap<String, f64>,
    /// lexicon name -> version tag, carried into run manifests.
    pub versions: BTreeMap<String, String>,
}

static BUILTIN: OnceLock<LexiconSet> = OnceLock::new();

impl LexiconSet {
    /// The lexica compiled into the crate.
    pub fn builtin() -> &'static LexiconSet {
        BUILTIN.get_or_init(|| {
            let hedges = parse_word_list("hedges", include_str!("../../data/hedges.txt"))
                .expect("builtin hedges lexicon");
            let transitions =
                parse_word_list("transitions", include_str!("../../data/transitions.txt"))
                    .expect("builtin transitions lexicon");
            let superlatives =
                parse_word_list("superlatives", include_str!("../../data/superlatives.txt"))
                    .expect("builtin superlatives lexicon");
            let sentiment = parse_word_list("sentiment", include_str!("../../data/sentiment.txt"))
                .expect("builtin sentiment lexicon");
            let toxicity = parse_word_list("toxicity", include_str!("../../data/toxicity.txt"))
                .expect("builtin toxicity lexicon");
            LexiconSet::assemble(hedges, transitions, superlatives, sentiment, toxicity)
        })
    }

    /// Load all five lexica from a directory containing `hedges.txt`,
    /// `transitions.txt`, `superlatives.txt`, `sentiment.txt`, and
    /// `toxicity.txt`.
    pub fn load_dir(dir: &Path) -> Result<LexiconSet, LexiconError> {
        Ok(LexiconSet::assemble(
            load_word_list(&dir.join("hedges.txt"))?,
            load_word_list(&dir.join("transitions.txt"))?,
            load_word_list(&dir.join("superlatives.txt"))?,
            load_word_list(&dir.join("sentiment.txt"))?,
            load_word_list(&dir.join("toxicity.txt"))?,
        ))
    }

    fn assemble(
        hedges: WordList,
        transitions: WordList,
        superlatives: WordList,
        sentiment: WordList,
        toxicity: WordList,
    ) -> LexiconSet {
        let mut versions = BTreeMap::new();
        versions.insert("hedges".to_string(), hedges.version.clone());
        versions.insert("transitions".to_string(), transitions.version.clone());
        versions.insert("superlatives".to_string(), superlatives.version.clone());
        versions.insert("sentiment".to_string(), sentiment.version.clone());
        versions.insert("toxicity".to_string(), toxicity.version.clone());
        LexiconSet {
            hedges: hedges.word_set(),
            transitions: transitions.word_set(),
            superlatives: superlatives.word_set(),
            sentiment: sentiment.entries,
            toxicity: toxicity.entries,
            versions,
        }
    }
}
