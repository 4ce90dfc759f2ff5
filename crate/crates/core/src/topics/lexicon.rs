//! Topical category lexicon.
//!
//! File format: UTF-8 text, one category per line:
//!
//! ```text
//! category_name: term1, term2, term3*
//! ```
//!
//! A trailing `*` on a term makes it a prefix match. Lines starting with
//! `#` are comments; `# version: <tag>` names the lexicon version. A small
//! 20-category demonstration lexicon ships with the crate; a full
//! 194-category lexicon in the same format can be loaded from disk.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopicLexiconError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("topic lexicon has no categories")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub text: String,
    pub prefix: bool,
}

impl Term {
    pub fn matches(&self, token: &str) -> bool {
        if self.prefix {
            token.starts_with(self.text.as_str())
        } else {
            token == self.text
        }
    }
}

#[derive(Debug, Clone)]
pub struct TopicLexicon {
    pub categories: BTreeMap<String, Vec<Term>>,
    pub version: String,
}

impl TopicLexicon {
    pub fn parse(content: &str) -> Result<Self, TopicLexiconError> {
        let mut categories = BTreeMap::new();
        let mut version = "unversioned".to_string();
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
            let (name, terms) = line.split_once(':').ok_or(TopicLexiconError::Parse {
                line: idx + 1,
                message: "expected `category: term1, term2`".to_string(),
            })?;
            let name = name.trim().to_string();
            if name.is_empty() {
                return Err(TopicLexiconError::Parse {
                    line: idx + 1,
                    message: "empty category name".to_string(),
                });
            }
            let terms: Vec<Term> = terms
                .split(',')
                .map(|t| t.trim().to_lowercase())
                .filter(|t| !t.is_empty())
                .map(|t| match t.strip_suffix('*') {
                    Some(stem) => Term {
                        text: stem.to_string(),
                        prefix: true,
                    },
                    None => Term {
                        text: t,
                        prefix: false,
                    },
                })
                .collect();
            if terms.is_empty() {
                return Err(TopicLexiconError::Parse {
                    line: idx + 1,
                    message: format!("category {name} has no terms"),
                });
            }
            if categories.insert(name.clone(), terms).is_some() {
                return Err(TopicLexiconError::Parse {
                    line: idx + 1,
                    message: format!("duplicate category {name}"),
                });
            }
        }
        if categories.is_empty() {
            return Err(TopicLexiconError::Empty);
        }
        Ok(TopicLexicon {
            categories,
            version,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TopicLexiconError> {
        let content = std::fs::read_to_string(path).map_err(|source| TopicLexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        TopicLexicon::parse(&content)
    }

    /// The 20-category demonstration lexicon compiled into the crate.
    pub fn builtin_demo() -> Self {
        TopicLexicon::parse(include_str!("../../data/topics_demo.txt"))
            .expect("builtin demo topic lexicon")
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}
