//! Generation orchestration: persona synthesis, the prompt-configuration
//! ladder, context retrieval, and N-candidate sampling against any
//! chat-completion endpoint.

pub mod chat;
pub mod prompt;
pub mod retrieval;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError};
use crate::encoder::EncoderError;
use crate::rng::{mix_seed, Rng};
use crate::selector::CandidateSet;

pub use chat::{
    ChatClient, ChatError, ChatMessage, ChatRequest, EndpointConfig, HttpChatEndpoint,
    RetryPolicy, ScriptedEndpoint, DEFAULT_TEMPERATURE,
};
pub use prompt::{
    build_prompt, persona_prompt, persona_template_hash, style_examples, template_hash,
    PromptConfig, PromptKind, PERSONA_SYNTHESIS_INSTRUCTION, PERSONA_TEMPLATE_VERSION,
    TEMPLATE_VERSION,
};
pub use retrieval::RetrievalIndex;

/// Training replies sampled into the persona-synthesis request.
pub const DEFAULT_PERSONA_SAMPLE: usize = 100;

/// Candidates generated per test message.
pub const DEFAULT_CANDIDATES: usize = 20;

/// Completion budget as a multiple of `n`, covering empty or refused
/// completions.
pub const OVER_PROVISION: f64 = 1.5;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown user {0}")]
    UnknownUser(String),
    #[error("user {0} has no persona; run persona synthesis first")]
    MissingPersona(String),
    #[error("no retrieval index entries for user {0}")]
    EmptyIndex(String),
    #[error("user {0} has no training replies")]
    NoTrainingReplies(String),
    #[error("endpoint returned an empty completion where one was required")]
    EmptyCompletion,
    #[error(transparent)]
    Chat(#[from] ChatError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Semsim(#[from] crate::semsim::SemsimError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Call `complete`, retrying transport failures with exponential backoff.
pub fn complete_with_retries(
    client: &dyn ChatClient,
    request: &ChatRequest,
    retry: &RetryPolicy,
) -> Result<Vec<String>, ChatError> {
    let mut attempt = 0u32;
    loop {
        match client.complete(request) {
            Ok(choices) => return Ok(choices),
            Err(ChatError::Transport { target, message }) if attempt < retry.max_retries => {
                let delay =
                    std::time::Duration::from_millis(retry.base_delay_ms << attempt);
                log::warn!(
                    "transport failure against {target}: {message}; retry {attempt} in {delay:?}"
                );
                std::thread::sleep(delay);
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Synthesize a persona for one user from a seeded sample of at most
/// `sample_size` training replies. The persona is returned, not stored;
/// callers attach it via [`Corpus::set_persona`].
pub fn build_persona(
    corpus: &Corpus,
    user_id: &str,
    client: &dyn ChatClient,
    sample_size: usize,
    seed: u64,
    retry: &RetryPolicy,
) -> Result<String, HarnessError> {
    let user = corpus
        .user(user_id)
        .ok_or_else(|| HarnessError::UnknownUser(user_id.to_string()))?;
    if user.train_reply_ids.is_empty() {
        return Err(HarnessError::NoTrainingReplies(user_id.to_string()));
    }
    let take = sample_size.min(user.train_reply_ids.len());
    let mut rng = Rng::new(mix_seed(seed, &format!("persona:{user_id}")));
    let idx = rng.sample_indices(user.train_reply_ids.len(), take);
    let sampled: Vec<String> = idx
        .into_iter()
        .map(|i| {
            corpus
                .reply(&user.train_reply_ids[i])
                .expect("profile ids resolve")
                .text
                .clone()
        })
        .collect();

    let request = ChatRequest {
        messages: vec![ChatMessage::user(persona_prompt(&sampled))],
        n: 1,
    };
    let completion = complete_with_retries(client, &request, retry)?
        .into_iter()
        .next()
        .ok_or(ChatError::NoChoices)?;
    let persona = completion.trim().to_string();
    if persona.is_empty() {
        return Err(HarnessError::EmptyCompletion);
    }
    Ok(persona)
}

/// Per-request metadata logged during candidate generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RequestMeta {
    pub n_requested: usize,
    pub n_returned: usize,
    pub n_empty: usize,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationOutcome {
    /// Whitespace-trimmed non-empty completions, endpoint order preserved.
    pub candidates: Vec<String>,
    /// Completions requested in total (the over-provision budget caps this
    /// at `ceil(1.5 * n)`).
    pub attempts: usize,
    /// False when the budget ran out before `n` candidates arrived.
    pub complete: bool,
    pub requests: Vec<RequestMeta>,
}

/// Request `n` completions for one prompt, topping up for empty
/// completions until the over-provision budget runs out. A short set comes
/// back with `complete == false` rather than an error.
pub fn generate_candidates(
    client: &dyn ChatClient,
    prompt: &str,
    n: usize,
    retry: &RetryPolicy,
) -> Result<GenerationOutcome, HarnessError> {
    assert!(n >= 1, "need at least one candidate");
    let budget = (n as f64 * OVER_PROVISION).ceil() as usize;
    let mut candidates: Vec<String> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    let mut requests = Vec::new();
    while candidates.len() < n && attempts < budget {
        let shortfall = n - candidates.len();
        let req_n = shortfall.min(budget - attempts);
        let request = ChatRequest {
            messages: vec![ChatMessage::user(prompt)],
            n: req_n,
        };
        let started = Instant::now();
        let completions = complete_with_retries(client, &request, retry)?;
        let mut n_empty = 0usize;
        let n_returned = completions.len();
        for completion in completions {
            let trimmed = completion.trim();
            if trimmed.is_empty() {
                n_empty += 1;
            } else if candidates.len() < n {
                candidates.push(trimmed.to_string());
            }
        }
        attempts += req_n;
        requests.push(RequestMeta {
            n_requested: req_n,
            n_returned,
            n_empty,
            latency_ms: started.elapsed().as_millis() as u64,
        });
    }
    let complete = candidates.len() == n;
    if !complete {
        log::warn!(
            "candidate generation fell short: {}/{} after {attempts} attempts",
            candidates.len(),
            n
        );
    }
    Ok(GenerationOutcome {
        candidates,
        attempts,
        complete,
        requests,
    })
}

/// Build the prompt for one test message and generate its candidate set.
#[allow(clippy::too_many_arguments)]
pub fn generate_for_message(
    client: &dyn ChatClient,
    config: &PromptConfig,
    corpus: &Corpus,
    user_id: &str,
    reply_id: &str,
    parent_text: &str,
    index: Option<&RetrievalIndex>,
    n: usize,
    seed: u64,
    retry: &RetryPolicy,
) -> Result<(CandidateSet, GenerationOutcome), HarnessError> {
    let prompt = build_prompt(config, corpus, user_id, parent_text, index, seed)?;
    let outcome = generate_candidates(client, &prompt, n, retry)?;
    let set = CandidateSet {
        reply_id: reply_id.to_string(),
        user_id: user_id.to_string(),
        model_id: client.model_name().to_string(),
        config_id: config.kind.as_str().to_string(),
        candidates: outcome.candidates.clone(),
    };
    Ok((set, outcome))
}
