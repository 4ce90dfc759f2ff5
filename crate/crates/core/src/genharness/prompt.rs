//! Prompt assembly for the four prompt configurations.
//!
//! Templates are fixed strings versioned by [`TEMPLATE_VERSION`] and hashed
//! by [`template_hash`]; run manifests record the hash so any result can
//! name the exact template it used. Sections are delimited by fixed
//! bracketed markers and assembled in a fixed order, so `build_prompt` is a
//! pure function of its arguments.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Corpus;
use crate::rng::{mix_seed, Rng};

use super::retrieval::RetrievalIndex;
use super::HarnessError;

/// Prompt configuration ladder: baseline, persona, persona plus stylistic
/// examples, persona plus stylistic examples plus context retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Bl,
    Pe,
    PeSe,
    PeSeCr,
}

impl PromptKind {
    pub const LADDER: [PromptKind; 4] =
        [PromptKind::Bl, PromptKind::Pe, PromptKind::PeSe, PromptKind::PeSeCr];

    pub fn as_str(&self) -> &'static str {
        match self {
            PromptKind::Bl => "bl",
            PromptKind::Pe => "pe",
            PromptKind::PeSe => "pe_se",
            PromptKind::PeSeCr => "pe_se_cr",
        }
    }

    pub fn parse(s: &str) -> Option<PromptKind> {
        match s {
            "bl" => Some(PromptKind::Bl),
            "pe" => Some(PromptKind::Pe),
            "pe_se" => Some(PromptKind::PeSe),
            "pe_se_cr" => Some(PromptKind::PeSeCr),
            _ => None,
        }
    }

    fn wants_persona(&self) -> bool {
        !matches!(self, PromptKind::Bl)
    }

    fn wants_style_examples(&self) -> bool {
        matches!(self, PromptKind::PeSe | PromptKind::PeSeCr)
    }

    fn wants_retrieval(&self) -> bool {
        matches!(self, PromptKind::PeSeCr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PromptConfig {
    pub kind: PromptKind,
    #[serde(default = "default_style_examples")]
    pub n_style_examples: usize,
    #[serde(default = "default_retrieved")]
    pub n_retrieved: usize,
}

fn default_style_examples() -> usize {
    10
}
fn default_retrieved() -> usize {
    3
}

impl PromptConfig {
    pub fn new(kind: PromptKind) -> Self {
        PromptConfig {
            kind,
            n_style_examples: default_style_examples(),
            n_retrieved: default_retrieved(),
        }
    }
}

pub const TEMPLATE_VERSION: &str = "prompt-templates-1";

const TASK_INSTRUCTION: &str = "You are replying on a social media platform. Write exactly one \
concise one-sentence reply to the message below. Output only the reply text.";

const PERSONA_HEADER: &str = "[PERSONA]\nYou are the user described here; stay fully in their \
voice:";

const STYLE_HEADER: &str = "[STYLE EXAMPLES]\nPrior replies written by this user, as style \
reference:";

const CONTEXT_HEADER: &str = "[CONTEXT]\nEarlier posts by this user that relate to the message:";

const MESSAGE_HEADER: &str = "[MESSAGE]\nReply to this message:";

/// Instruction sent to the persona-synthesis endpoint together with the
/// sampled replies.
pub const PERSONA_SYNTHESIS_INSTRUCTION: &str = "Read the following social media replies, all \
written by one user. Describe that user in a short paragraph: their interests, typical topics, \
tone, and writing style. Output only the description.";

pub const PERSONA_TEMPLATE_VERSION: &str = "persona-template-1";

/// SHA-256 over the fixed prompt template strings.
pub fn template_hash() -> String {
    let mut hasher = Sha256::new();
    for part in [
        TEMPLATE_VERSION,
        TASK_INSTRUCTION,
        PERSONA_HEADER,
        STYLE_HEADER,
        CONTEXT_HEADER,
        MESSAGE_HEADER,
    ] {
        hasher.update(part.as_bytes());
        hasher.update([0u8]);
    }
    hex_digest(hasher)
}

/// SHA-256 over the persona-synthesis template.
pub fn persona_template_hash() -> String {
    let mut hasher = Sha256::new();
    hasher.update(PERSONA_TEMPLATE_VERSION.as_bytes());
    hasher.update([0u8]);
    hasher.update(PERSONA_SYNTHESIS_INSTRUCTION.as_bytes());
    hex_digest(hasher)
}

fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Stylistic examples for one user: a seeded sample of training replies,
/// drawn once per (seed, user) so every message in a run sees the same
/// style card.
pub fn style_examples(
    corpus: &Corpus,
    user_id: &str,
    n: usize,
    seed: u64,
) -> Result<Vec<String>, HarnessError> {
    let user = corpus
        .user(user_id)
        .ok_or_else(|| HarnessError::UnknownUser(user_id.to_string()))?;
    let ids = &user.train_reply_ids;
    let take = n.min(ids.len());
    let mut rng = Rng::new(mix_seed(seed, &format!("style:{user_id}")));
    let idx = rng.sample_indices(ids.len(), take);
    Ok(idx
        .into_iter()
        .map(|i| {
            corpus
                .reply(&ids[i])
                .expect("profile reply ids resolve")
                .text
                .clone()
        })
        .collect())
}

/// Assemble the prompt for one test message under the given configuration.
pub fn build_prompt(
    config: &PromptConfig,
    corpus: &Corpus,
    user_id: &str,
    parent_text: &str,
    index: Option<&RetrievalIndex>,
    seed: u64,
) -> Result<String, HarnessError> {
    let user = corpus
        .user(user_id)
        .ok_or_else(|| HarnessError::UnknownUser(user_id.to_string()))?;

    let mut sections: Vec<String> = vec![format!("[TASK]\n{TASK_INSTRUCTION}")];

    if config.kind.wants_persona() {
        let persona = user
            .persona
            .as_ref()
            .ok_or_else(|| HarnessError::MissingPersona(user_id.to_string()))?;
        sections.push(format!("{PERSONA_HEADER}\n{persona}"));
    }

    let mut examples: Vec<String> = Vec::new();
    if config.kind.wants_style_examples() {
        examples = style_examples(corpus, user_id, config.n_style_examples, seed)?;
        let listed = examples
            .iter()
            .enumerate()
            .map(|(i, t)| format!("{}. {t}", i + 1))
            .collect::<Vec<_>>()
            .join("\n");
        sections.push(format!("{STYLE_HEADER}\n{listed}"));
    }

    if config.kind.wants_retrieval() {
        let index = index.ok_or_else(|| HarnessError::EmptyIndex(user_id.to_string()))?;
        let exclude: Vec<&str> = examples.iter().map(|s| s.as_str()).collect();
        let retrieved = index.retrieve(user_id, parent_text, config.n_retrieved, &exclude)?;
        if retrieved.is_empty() {
            return Err(HarnessError::EmptyIndex(user_id.to_string()));
        }
        let listed = retrieved
            .iter()
            .map(|(t, _)| format!("- {t}"))
            .collect::<Vec<_>>()
            .join("\n");
        sections.push(format!("{CONTEXT_HEADER}\n{listed}"));
    }

    sections.push(format!("{MESSAGE_HEADER}\n{parent_text}"));
    Ok(sections.join("\n\n"))
}

/// The persona-synthesis prompt for a sample of user replies.
pub fn persona_prompt(sampled_replies: &[String]) -> String {
    let listed = sampled_replies
        .iter()
        .enumerate()
        .map(|(i, t)| format!("{}. {t}", i + 1))
        .collect::<Vec<_>>()
        .join("\n");
    format!("{PERSONA_SYNTHESIS_INSTRUCTION}\n\n[REPLIES]\n{listed}")
}
