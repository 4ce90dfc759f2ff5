//! Best-of-N post-generation selection.
//!
//! Two strategies pick one candidate out of each set of N generated
//! replies. Cosine-optimal picks the candidate whose embedding is most
//! similar to the human reference reply. ML-optimal partitions users into
//! folds, trains a random forest on interpretable features of the OTHER
//! folds' candidates (labeled AI) plus human training replies, and picks
//! the candidate the held-out fold's model most confidently misclassifies
//! as human. Ties always break to the lowest candidate index.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Label, Reply};
use crate::detector::{DetectorError, ForestParams, RandomForest};
use crate::encoder::{Encoder, EncoderError};
use crate::rng::mix_seed;
use crate::semsim::{cosine, SemsimError};
use crate::textfeat::{FeaturePipeline, TextFeatError};

pub const DEFAULT_N_FOLDS: usize = 5;

#[derive(Debug, Error)]
pub enum SelectorError {
    #[error("candidate set {reply_id} has no candidates")]
    EmptyCandidates { reply_id: String },
    #[error("reference text is empty")]
    EmptyReference,
    #[error("need at least {needed} distinct users for {needed} folds, got {got}")]
    TooFewUsers { needed: usize, got: usize },
    #[error("fold {fold} has no users")]
    EmptyFold { fold: usize },
    #[error("n_folds must be >= 2, got {0}")]
    BadFoldCount(usize),
    #[error("outcome lists are misaligned: {detail}")]
    Misaligned { detail: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Semsim(#[from] SemsimError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Features(#[from] TextFeatError),
}

/// N generated candidate replies for one test message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub reply_id: String,
    pub user_id: String,
    #[serde(rename = "model")]
    pub model_id: String,
    #[serde(rename = "config")]
    pub config_id: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    CosineOptimal,
    MlOptimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub strategy: Strategy,
    pub reply_id: String,
    pub chosen_index: usize,
    pub per_candidate_scores: Vec<f64>,
}

/// First index achieving the maximum score.
fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// Pick the candidate with the highest embedding cosine similarity to the
/// reference reply.
pub fn select_cosine_optimal(
    set: &CandidateSet,
    reference_text: &str,
    encoder: &dyn Encoder,
) -> Result<SelectionOutcome, SelectorError> {
    if set.candidates.is_empty() {
        return Err(SelectorError::EmptyCandidates {
            reply_id: set.reply_id.clone(),
        });
    }
    if reference_text.trim().is_empty() {
        return Err(SelectorError::EmptyReference);
    }
    let mut texts = Vec::with_capacity(set.candidates.len() + 1);
    texts.push(reference_text.to_string());
    texts.extend(set.candidates.iter().cloned());
    let vectors = encoder.embed_batch(&texts)?;
    let reference = &vectors[0];
    let scores: Vec<f64> = vectors[1..]
        .iter()
        .map(|v| cosine(reference, v))
        .collect::<Result<_, _>>()?;
    Ok(SelectionOutcome {
        strategy: Strategy::CosineOptimal,
        reply_id: set.reply_id.clone(),
        chosen_index: argmax_first(&scores),
        per_candidate_scores: scores,
    })
}

/// Deterministic assignment of candidate sets to folds by a seeded hash of
/// the owning user id; adding users later does not reshuffle existing
/// folds for the same seed.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub fold_of_set: Vec<usize>,
    pub fold_of_user: BTreeMap<String, usize>,
}

pub fn plan_folds(
    sets: &[CandidateSet],
    n_folds: usize,
    seed: u64,
) -> Result<FoldPlan, SelectorError> {
    if n_folds < 2 {
        return Err(SelectorError::BadFoldCount(n_folds));
    }
    let users: BTreeSet<&str> = sets.iter().map(|s| s.user_id.as_str()).collect();
    if users.len() < n_folds {
        return Err(SelectorError::TooFewUsers {
            needed: n_folds,
            got: users.len(),
        });
    }
    let mut fold_of_user = BTreeMap::new();
    for user in users {
        let fold = (mix_seed(seed, user) % n_folds as u64) as usize;
        fold_of_user.insert(user.to_string(), fold);
    }
    for fold in 0..n_folds {
        if !fold_of_user.values().any(|&f| f == fold) {
            return Err(SelectorError::EmptyFold { fold });
        }
    }
    let fold_of_set = sets
        .iter()
        .map(|s| fold_of_user[s.user_id.as_str()])
        .collect();
    Ok(FoldPlan {
        n_folds,
        fold_of_set,
        fold_of_user,
    })
}

/// Per-fold record of which users' candidates trained the scorer and which
/// users it scored; the fold-discipline audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAudit {
    pub fold: usize,
    pub trained_candidate_users: BTreeSet<String>,
    pub scored_users: BTreeSet<String>,
    pub n_train_ai: usize,
    pub n_train_human: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlSelectionAudit {
    pub per_fold: Vec<FoldAudit>,
}

impl MlSelectionAudit {
    /// True when no fold's scorer ever saw a candidate from a user it
    /// scored.
    pub fn leak_free(&self) -> bool {
        self.per_fold
            .iter()
            .all(|f| f.trained_candidate_users.is_disjoint(&f.scored_users))
    }
}

pub struct MlSelection {
    pub outcomes: Vec<SelectionOutcome>,
    pub audit: MlSelectionAudit,
    pub feature_schema: Vec<String>,
}

/// ML-optimal selection over every candidate set, scored with per-fold
/// forests (100 trees, seeded). Scores are probabilities of the HUMAN
/// label, so the argmax is the candidate most likely to be misclassified
/// as human. Outcomes come back in input-set order.
pub fn select_ml_optimal(
    sets: &[CandidateSet],
    human_train: &[&Reply],
    pipeline: &FeaturePipeline,
    n_folds: usize,
    seed: u64,
) -> Result<MlSelection, SelectorError> {
    for set in sets {
        if set.candidates.is_empty() {
            return Err(SelectorError::EmptyCandidates {
                reply_id: set.reply_id.clone(),
            });
        }
    }
    let plan = plan_folds(sets, n_folds, seed)?;

    let candidate_features: Vec<Vec<crate::textfeat::FeatureVector>> = sets
        .iter()
        .map(|s| {
            s.candidates
                .iter()
                .map(|c| pipeline.extract(c))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let human_rows: Vec<Vec<f64>> = human_train
        .iter()
        .map(|r| Ok(pipeline.extract(&r.text)?.as_array().to_vec()))
        .collect::<Result<_, SelectorError>>()?;

    let mut outcomes: Vec<Option<SelectionOutcome>> = vec![None; sets.len()];
    let mut per_fold_audit = Vec::with_capacity(plan.n_folds);
    for fold in 0..plan.n_folds {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut labels: Vec<Label> = Vec::new();
        let mut trained_users = BTreeSet::new();
        for (i, set) in sets.iter().enumerate() {
            if plan.fold_of_set[i] != fold {
                trained_users.insert(set.user_id.clone());
                for fv in &candidate_features[i] {
                    rows.push(fv.as_array().to_vec());
                    labels.push(Label::Ai);
                }
            }
        }
        let n_train_ai = rows.len();
        for row in &human_rows {
            rows.push(row.clone());
            labels.push(Label::Human);
        }
        let forest = RandomForest::fit(
            &rows,
            &labels,
            ForestParams::default(),
            mix_seed(seed, &format!("fold-{fold}")),
        )?;

        let mut scored_users = BTreeSet::new();
        for (i, set) in sets.iter().enumerate() {
            if plan.fold_of_set[i] != fold {
                continue;
            }
            scored_users.insert(set.user_id.clone());
            let scores: Vec<f64> = candidate_features[i]
                .iter()
                .map(|fv| forest.predict_proba_ai(&fv.as_array()).map(|p| 1.0 - p))
                .collect::<Result<_, _>>()?;
            outcomes[i] = Some(SelectionOutcome {
                strategy: Strategy::MlOptimal,
                reply_id: set.reply_id.clone(),
                chosen_index: argmax_first(&scores),
                per_candidate_scores: scores,
            });
        }
        per_fold_audit.push(FoldAudit {
            fold,
            trained_candidate_users: trained_users,
            scored_users,
            n_train_ai,
            n_train_human: human_rows.len(),
        });
    }
    let outcomes = outcomes
        .into_iter()
        .map(|o| o.expect("every set belongs to exactly one fold"))
        .collect();
    Ok(MlSelection {
        outcomes,
        audit: MlSelectionAudit {
            per_fold: per_fold_audit,
        },
        feature_schema: pipeline.feature_schema(),
    })
}

/// Fraction of reply ids where both strategies picked the same candidate.
pub fn overlap_rate(
    a: &[SelectionOutcome],
    b: &[SelectionOutcome],
) -> Result<f64, SelectorError> {
    if a.is_empty() || a.len() != b.len() {
        return Err(SelectorError::Misaligned {
            detail: format!("lengths {} vs {}", a.len(), b.len()),
        });
    }
    let index_of = |outcomes: &[SelectionOutcome]| -> BTreeMap<String, usize> {
        outcomes
            .iter()
            .map(|o| (o.reply_id.clone(), o.chosen_index))
            .collect()
    };
    let map_a = index_of(a);
    let map_b = index_of(b);
    if map_a.len() != a.len() {
        return Err(SelectorError::Misaligned {
            detail: "duplicate reply ids".to_string(),
        });
    }
    let keys_a: BTreeSet<&String> = map_a.keys().collect();
    let keys_b: BTreeSet<&String> = map_b.keys().collect();
    if keys_a != keys_b {
        return Err(SelectorError::Misaligned {
            detail: "reply id sets differ".to_string(),
        });
    }
    let matches = map_a
        .iter()
        .filter(|(id, idx)| map_b[id.as_str()] == **idx)
        .count();
    Ok(matches as f64 / map_a.len() as f64)
}

/// Write candidate sets as JSONL, one per line.
pub fn write_candidate_sets(path: &Path, sets: &[CandidateSet]) -> Result<(), SelectorError> {
    let mut out = std::fs::File::create(path).map_err(|source| SelectorError::Io {
        path: path.display().to_string(),
        source,
    })?;
    for set in sets {
        let line = serde_json::to_string(set).expect("candidate set serializes");
        writeln!(out, "{line}").map_err(|source| SelectorError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

pub fn read_candidate_sets(path: &Path) -> Result<Vec<CandidateSet>, SelectorError> {
    let file = std::fs::File::open(path).map_err(|source| SelectorError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut sets = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| SelectorError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let set: CandidateSet =
            serde_json::from_str(&line).map_err(|e| SelectorError::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        sets.push(set);
    }
    Ok(sets)
}

/// Outcome file: a `{"meta": ...}` header line recording the strategy and
/// (for ML-optimal) the feature schema, then one outcome per line.
pub fn write_outcomes(
    path: &Path,
    outcomes: &[SelectionOutcome],
    feature_schema: Option<&[String]>,
) -> Result<(), SelectorError> {
    let mut out = std::fs::File::create(path).map_err(|source| SelectorError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let meta = serde_json::json!({
        "meta": {
            "strategy": outcomes.first().map(|o| o.strategy),
            "feature_schema": feature_schema,
        }
    });
    let mut write_line = |line: String| -> Result<(), SelectorError> {
        writeln!(out, "{line}").map_err(|source| SelectorError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    write_line(meta.to_string())?;
    for outcome in outcomes {
        write_line(serde_json::to_string(outcome).expect("outcome serializes"))?;
    }
    Ok(())
}

pub fn read_outcomes(path: &Path) -> Result<Vec<SelectionOutcome>, SelectorError> {
    let file = std::fs::File::open(path).map_err(|source| SelectorError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut outcomes = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| SelectorError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() || (idx == 0 && line.contains("\"meta\"")) {
            continue;
        }
        outcomes.push(
            serde_json::from_str(&line).map_err(|e| SelectorError::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Platform, Source, Split};
    use crate::encoder::HashedEncoder;

    fn set(reply_id: &str, user_id: &str, candidates: &[&str]) -> CandidateSet {
        CandidateSet {
            reply_id: reply_id.to_string(),
            user_id: user_id.to_string(),
            model_id: "m".to_string(),
            config_id: "c".to_string(),
            candidates: candidates.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn cosine_optimal_picks_verbatim_match() {
        let enc = HashedEncoder::new(128, 2);
        let s = set(
            "r1",
            "u1",
            &[
                "totally different words here",
                "the city budget vote passed tonight",
                "another unrelated reply",
            ],
        );
        let outcome =
            select_cosine_optimal(&s, "the city budget vote passed tonight", &enc).unwrap();
        assert_eq!(outcome.chosen_index, 1);
        assert!((outcome.per_candidate_scores[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_optimal_tie_breaks_to_first() {
        let enc = HashedEncoder::new(128, 2);
        let s = set("r1", "u1", &["same text", "same text", "same text"]);
        let outcome = select_cosine_optimal(&s, "reference reply", &enc).unwrap();
        assert_eq!(outcome.chosen_index, 0);
    }

    #[test]
    fn cosine_optimal_rejects_empty_reference() {
        let enc = HashedEncoder::new(128, 2);
        let s = set("r1", "u1", &["a"]);
        assert!(matches!(
            select_cosine_optimal(&s, "  ", &enc),
            Err(SelectorError::EmptyReference)
        ));
    }

    #[test]
    fn fold_plan_is_deterministic_and_total() {
        let sets: Vec<CandidateSet> = (0..20)
            .map(|i| set(&format!("r{i}"), &format!("user-{i}"), &["a", "b"]))
            .collect();
        let plan_a = plan_folds(&sets, 5, 9).unwrap();
        let plan_b = plan_folds(&sets, 5, 9).unwrap();
        assert_eq!(plan_a, plan_b);
        assert!(plan_a.fold_of_set.iter().all(|&f| f < 5));
        // Same user ends up in the same fold regardless of which sets exist.
        let subset = &sets[..10];
        let plan_c = plan_folds(subset, 5, 9);
        if let Ok(plan_c) = plan_c {
            for (user, fold) in &plan_c.fold_of_user {
                assert_eq!(plan_a.fold_of_user[user], *fold);
            }
        }
    }

    #[test]
    fn fold_plan_needs_enough_users() {
        let sets = vec![set("r1", "u1", &["a"]), set("r2", "u1", &["a"])];
        assert!(matches!(
            plan_folds(&sets, 2, 1),
            Err(SelectorError::TooFewUsers { .. })
        ));
    }

    fn human_replies(texts: &[&str]) -> Vec<Reply> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Reply {
                id: format!("h{i}"),
                user_id: "pool".to_string(),
                platform: Platform::Twitter,
                parent_text: String::new(),
                text: t.to_string(),
                split: Split::Train,
                source: Source::Human,
            })
            .collect()
    }

    /// Human style: commas, emoji, lowercase. Machine style: Title Case,
    /// no commas, no emoji. Content words vary per user so no candidate is
    /// a verbatim copy of another fold's training row.
    fn styled_sets(n_users: usize) -> Vec<CandidateSet> {
        let topics = [
            "budget", "match", "concert", "rally", "update", "launch", "episode", "debate",
            "meetup", "patch", "recap", "stream",
        ];
        (0..n_users)
            .map(|u| {
                let topic = topics[u % topics.len()];
                let machine_a =
                    format!("The Board Will Convene To Review The {topic} Proposal Accordingly");
                let human_like = format!("tbh, that {topic} thing was wild, right 😀");
                let machine_b =
                    format!("It Remains Imperative That {topic} Procedures Be Strictly Observed");
                set(
                    &format!("r{u}"),
                    &format!("user-{u}"),
                    &[&machine_a, &human_like, &machine_b],
                )
            })
            .collect()
    }

    fn casual_human_pool() -> Vec<Reply> {
        human_replies(&[
            "lol, that game was wild, right 😀",
            "omg, the crowd went crazy tonight 😀",
            "ngl, that play was smooth, loved it 😀",
            "yeah, fair point tbh, no lies 😀",
            "wait, did that really just happen 😀",
            "ok, that set was actually great 😀",
            "man, what a day, seriously wild 😀",
            "nah, no way they pulled that off 😀",
            "tbh, that show was something else 😀",
            "hey, nice one, loved every second 😀",
            "huh, that recap thing was wild, right 😀",
            "yo, that stream got wild, right 😀",
            "so, that update was neat, right 😀",
            "well, that debate went sideways, right 😀",
            "hm, that launch looked clean, right 😀",
            "wow, that episode hit hard, right 😀",
        ])
    }

    #[test]
    fn ml_optimal_prefers_human_styled_candidate() {
        let sets = styled_sets(10);
        let humans = casual_human_pool();
        let human_refs: Vec<&Reply> = humans.iter().collect();
        let pipeline = FeaturePipeline::builtin();
        let selection = select_ml_optimal(&sets, &human_refs, &pipeline, 2, 3).unwrap();
        assert!(selection.audit.leak_free());
        assert_eq!(selection.feature_schema.len(), 19);
        for outcome in &selection.outcomes {
            assert_eq!(
                outcome.chosen_index, 1,
                "reply {} scores {:?}",
                outcome.reply_id, outcome.per_candidate_scores
            );
        }
    }

    #[test]
    fn ml_optimal_is_deterministic() {
        let sets = styled_sets(8);
        let humans = casual_human_pool();
        let human_refs: Vec<&Reply> = humans.iter().collect();
        let pipeline = FeaturePipeline::builtin();
        let a = select_ml_optimal(&sets, &human_refs, &pipeline, 2, 7).unwrap();
        let b = select_ml_optimal(&sets, &human_refs, &pipeline, 2, 7).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
    }

    #[test]
    fn overlap_rate_contracts() {
        let outcome = |id: &str, idx: usize| SelectionOutcome {
            strategy: Strategy::CosineOptimal,
            reply_id: id.to_string(),
            chosen_index: idx,
            per_candidate_scores: vec![0.0; 3],
        };
        let a = vec![outcome("r1", 0), outcome("r2", 1)];
        assert_eq!(overlap_rate(&a, &a).unwrap(), 1.0);
        let b = vec![outcome("r2", 2), outcome("r1", 1)];
        assert_eq!(overlap_rate(&a, &b).unwrap(), 0.0);
        let c = vec![outcome("r1", 0), outcome("r3", 1)];
        assert!(matches!(
            overlap_rate(&a, &c),
            Err(SelectorError::Misaligned { .. })
        ));
    }

    #[test]
    fn candidate_set_jsonl_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("candidates.jsonl");
        let sets = styled_sets(3);
        write_candidate_sets(&path, &sets).unwrap();
        let back = read_candidate_sets(&path).unwrap();
        assert_eq!(sets, back);
        // Wire field names match the documented schema.
        let first_line = std::fs::read_to_string(&path)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert!(first_line.contains("\"model\":") && first_line.contains("\"config\":"));
    }

    #[test]
    fn outcome_jsonl_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("outcomes.jsonl");
        let outcomes = vec![SelectionOutcome {
            strategy: Strategy::MlOptimal,
            reply_id: "r1".to_string(),
            chosen_index: 2,
            per_candidate_scores: vec![0.1, 0.2, 0.9],
        }];
        let schema = vec!["word_count".to_string()];
        write_outcomes(&path, &outcomes, Some(&schema)).unwrap();
        let back = read_outcomes(&path).unwrap();
        assert_eq!(outcomes, back);
        let header = std::fs::read_to_string(&path)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert!(header.contains("feature_schema"));
    }
}
