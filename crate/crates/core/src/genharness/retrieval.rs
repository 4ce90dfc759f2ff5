//! Similarity-based context retrieval over each user's training replies.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::corpus::Corpus;
use crate::encoder::Encoder;
use crate::semsim::cosine;

use super::HarnessError;

/// Per-user embeddings of training reply texts, queried by cosine
/// similarity against the message being replied to.
pub struct RetrievalIndex {
    encoder: Arc<dyn Encoder>,
    per_user: BTreeMap<String, Vec<(String, Vec<f64>)>>,
}

impl RetrievalIndex {
    /// Index the training replies of the given users (all users when
    /// `user_ids` is empty).
    pub fn build(
        corpus: &Corpus,
        user_ids: &[String],
        encoder: Arc<dyn Encoder>,
    ) -> Result<Self, HarnessError> {
        let mut per_user = BTreeMap::new();
        let users: Vec<&str> = if user_ids.is_empty() {
            corpus.users().map(|u| u.user_id.as_str()).collect()
        } else {
            user_ids.iter().map(|s| s.as_str()).collect()
        };
        for user_id in users {
            let user = corpus
                .user(user_id)
                .ok_or_else(|| HarnessError::UnknownUser(user_id.to_string()))?;
            let texts: Vec<String> = user
                .train_reply_ids
                .iter()
                .map(|id| corpus.reply(id).expect("profile ids resolve").text.clone())
                .collect();
            let vectors = encoder.embed_batch(&texts)?;
            per_user.insert(
                user_id.to_string(),
                texts.into_iter().zip(vectors).collect(),
            );
        }
        Ok(RetrievalIndex { encoder, per_user })
    }

    pub fn encoder_name(&self) -> &str {
        self.encoder.name()
    }

    pub fn has_entries(&self, user_id: &str) -> bool {
        self.per_user.get(user_id).is_some_and(|v| !v.is_empty())
    }

    /// Top-`n` training replies by cosine similarity to `query_text`,
    /// sorted by non-increasing score; entries whose text appears in
    /// `exclude` are skipped.
    pub fn retrieve(
        &self,
        user_id: &str,
        query_text: &str,
        n: usize,
        exclude: &[&str],
    ) -> Result<Vec<(String, f64)>, HarnessError> {
        let entries = self
            .per_user
            .get(user_id)
            .ok_or_else(|| HarnessError::EmptyIndex(user_id.to_string()))?;
        let query = self.encoder.embed(query_text)?;
        let mut scored: Vec<(usize, f64)> = entries
            .iter()
            .enumerate()
            .filter(|(_, (text, _))| !exclude.contains(&text.as_str()))
            .map(|(i, (_, vector))| Ok((i, cosine(&query, vector)?)))
            .collect::<Result<_, HarnessError>>()?;
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("finite scores")
                .then(a.0.cmp(&b.0))
        });
        Ok(scored
            .into_iter()
            .take(n)
            .map(|(i, score)| (entries[i].0.clone(), score))
            .collect())
    }
}
