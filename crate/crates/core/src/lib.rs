//! A computational Turing test for machine-generated social media replies.
//!
//! The toolkit measures how distinguishable generated replies are from
//! human-authored ones along three axes:
//!
//! * **detectability** — train a binary human-vs-AI classifier on a balanced
//!   dataset and report held-out accuracy averaged over seeds
//!   ([`detector`]); 50% accuracy means the classifier cannot tell the two
//!   apart.
//! * **semantic fidelity** — cosine similarity between embeddings of each
//!   generated reply and the human reference reply to the same message
//!   ([`semsim`]).
//! * **interpretable divergence** — 19 stylometric/affective features fed to
//!   a random-forest detector with impurity importances ([`textfeat`],
//!   [`detector`]), and per-category topical divergence tested with the
//!   Wilcoxon rank-sum test under Benjamini-Hochberg FDR control
//!   ([`topics`]).
//!
//! Around the measurement core sit a generation harness ([`genharness`])
//! that drives any chat-completion endpoint through a ladder of prompt
//! configurations, a best-of-N candidate selector ([`selector`]), and
//! report assembly ([`report`]).

pub mod config;
pub mod corpus;
pub mod encoder;
pub mod fixtures;
pub mod genharness;
pub mod detector;
pub mod report;
pub mod rng;
pub mod selector;
pub mod semsim;
pub mod textfeat;
pub mod topics;
