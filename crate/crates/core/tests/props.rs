//! Property tests for the statistical and text-processing invariants.

use proptest::prelude::*;

use ctt_core::corpus::{build_balanced_set, Platform, Reply, Source, Split};
use ctt_core::encoder::{Encoder, HashedEncoder};
use ctt_core::selector::{overlap_rate, select_cosine_optimal, CandidateSet};
use ctt_core::semsim::cosine;
use ctt_core::textfeat::{extract_features, self_entropy, FeaturePipeline, LexiconSet};
use ctt_core::topics::{bh_fdr, wilcoxon_rank_sum};

fn human_pool(n: usize) -> Vec<Reply> {
    (0..n)
        .map(|i| Reply {
            id: format!("h{i}"),
            user_id: "u".to_string(),
            platform: Platform::Twitter,
            parent_text: String::new(),
            text: format!("pool text number {i}"),
            split: Split::Train,
            source: Source::Human,
        })
        .collect()
}

proptest! {
    #[test]
    fn balanced_sets_have_equal_label_counts(
        n_ai in 1usize..60,
        extra in 0usize..40,
        seed in any::<u64>(),
    ) {
        let pool = human_pool(n_ai + extra);
        let pool_refs: Vec<&Reply> = pool.iter().collect();
        let ai: Vec<String> = (0..n_ai).map(|i| format!("ai {i}")).collect();
        let set = build_balanced_set(&ai, &pool_refs, seed).unwrap();
        let (human, ai_count) = set.label_counts();
        prop_assert_eq!(human, ai_count);
        prop_assert_eq!(set.len(), 2 * n_ai);
    }

    #[test]
    fn entropy_bounded_by_log_word_count(words in prop::collection::vec("[a-d]{1,2}", 1..40)) {
        let h = self_entropy(&words);
        let bound = (words.len() as f64).log2();
        prop_assert!(h <= bound + 1e-9, "H={h} bound={bound}");
        let distinct: std::collections::HashSet<&String> = words.iter().collect();
        if distinct.len() == words.len() {
            prop_assert!((h - bound).abs() < 1e-9);
        } else if words.len() > 1 {
            prop_assert!(h < bound - 1e-12 || distinct.len() == 1);
        }
    }

    #[test]
    fn feature_extraction_is_total_and_finite(text in "\\PC*") {
        let fv = extract_features(
            &text,
            LexiconSet::builtin(),
            FeaturePipeline::builtin().toxicity,
        )
        .unwrap();
        for v in fv.as_array() {
            prop_assert!(v.is_finite());
        }
        prop_assert!(fv.type_token_ratio <= 1.0 + 1e-12);
        prop_assert!((0.0..=1.0).contains(&fv.toxicity));
        prop_assert!((-1.0..=1.0).contains(&fv.sentiment_compound));
    }

    #[test]
    fn features_ignore_trailing_whitespace(
        text in "[ -~]{0,60}",
        pad in prop::collection::vec(prop::sample::select(vec![' ', '\t', '\n']), 0..6),
    ) {
        let pipeline = FeaturePipeline::builtin();
        let padded: String = format!("{}{}", text, pad.iter().collect::<String>());
        let a = pipeline.extract(&text).unwrap();
        let b = pipeline.extract(&padded).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn clauses_equal_one_iff_no_commas_single_sentence(words in prop::collection::vec("[a-z]{1,6}", 1..12), commas in 0usize..3) {
        let mut text = words.join(" ");
        for _ in 0..commas {
            text.push_str(", more");
        }
        text.push('.');
        let fv = FeaturePipeline::builtin().extract(&text).unwrap();
        if commas == 0 {
            prop_assert_eq!(fv.clauses_per_sentence, 1.0);
        } else {
            prop_assert!(fv.clauses_per_sentence > 1.0);
        }
    }

    #[test]
    fn wilcoxon_is_symmetric(
        a in prop::collection::vec(0i32..12, 1..12),
        b in prop::collection::vec(0i32..12, 1..12),
    ) {
        let af: Vec<f64> = a.iter().map(|&v| v as f64).collect();
        let bf: Vec<f64> = b.iter().map(|&v| v as f64).collect();
        let ra = wilcoxon_rank_sum(&af, &bf);
        let rb = wilcoxon_rank_sum(&bf, &af);
        prop_assert!((ra.p - rb.p).abs() < 1e-12, "p(a,b)={} p(b,a)={}", ra.p, rb.p);
    }

    #[test]
    fn wilcoxon_is_rank_based(
        a in prop::collection::vec(0i32..10, 1..10),
        b in prop::collection::vec(0i32..10, 1..10),
    ) {
        // Any strictly monotone transform preserves ranks, hence p.
        let af: Vec<f64> = a.iter().map(|&v| v as f64).collect();
        let bf: Vec<f64> = b.iter().map(|&v| v as f64).collect();
        let ta: Vec<f64> = a.iter().map(|&v| (v as f64 * 2.0 + 1.0).powi(3)).collect();
        let tb: Vec<f64> = b.iter().map(|&v| (v as f64 * 2.0 + 1.0).powi(3)).collect();
        let plain = wilcoxon_rank_sum(&af, &bf);
        let transformed = wilcoxon_rank_sum(&ta, &tb);
        prop_assert!((plain.p - transformed.p).abs() < 1e-12);
    }

    #[test]
    fn bh_is_permutation_invariant(
        ps in prop::collection::vec(0.0f64..=1.0, 1..40),
        seed in any::<u64>(),
    ) {
        let base = bh_fdr(&ps, 0.05);
        let mut order: Vec<usize> = (0..ps.len()).collect();
        let mut rng = ctt_core::rng::Rng::new(seed);
        rng.shuffle(&mut order);
        let shuffled: Vec<f64> = order.iter().map(|&i| ps[i]).collect();
        let shuffled_out = bh_fdr(&shuffled, 0.05);
        for (k, &i) in order.iter().enumerate() {
            prop_assert!((shuffled_out[k].0 - base[i].0).abs() < 1e-12);
            prop_assert_eq!(shuffled_out[k].1, base[i].1);
        }
    }

    #[test]
    fn bh_output_is_monotone_in_sorted_order(ps in prop::collection::vec(0.0f64..=1.0, 1..30)) {
        let out = bh_fdr(&ps, 0.05);
        let mut pairs: Vec<(f64, f64)> = ps.iter().cloned().zip(out.iter().map(|(a, _)| *a)).collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for w in pairs.windows(2) {
            prop_assert!(w[0].1 <= w[1].1 + 1e-12);
        }
    }

    #[test]
    fn cosine_symmetry_and_scale_invariance(
        a in prop::collection::vec(-10.0f64..10.0, 3..8),
        scale in 0.01f64..50.0,
    ) {
        let b: Vec<f64> = a.iter().rev().cloned().collect();
        let ab = cosine(&a, &b).unwrap();
        let ba = cosine(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        let scaled: Vec<f64> = a.iter().map(|v| v * scale).collect();
        let s = cosine(&scaled, &b).unwrap();
        prop_assert!((ab - s).abs() < 1e-9);
        prop_assert!(ab.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn cosine_selection_is_permutation_equivariant(
        n in 2usize..8,
        rot in 1usize..7,
        seed in any::<u64>(),
    ) {
        let mut rng = ctt_core::rng::Rng::new(seed);
        let words = ["river", "stone", "cloud", "ember", "signal", "harbor", "meadow", "circuit"];
        let candidates: Vec<String> = (0..n)
            .map(|_| {
                (0..4)
                    .map(|_| words[rng.gen_range(words.len() as u64) as usize])
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let reference = "river stone signal";
        let encoder = HashedEncoder::new(64, 9);
        let set = CandidateSet {
            reply_id: "r".to_string(),
            user_id: "u".to_string(),
            model_id: "m".to_string(),
            config_id: "c".to_string(),
            candidates: candidates.clone(),
        };
        let base = select_cosine_optimal(&set, reference, &encoder).unwrap();

        let rot = rot % n;
        let rotated: Vec<String> = (0..n).map(|i| candidates[(i + rot) % n].clone()).collect();
        let set_rot = CandidateSet { candidates: rotated, ..set.clone() };
        let out_rot = select_cosine_optimal(&set_rot, reference, &encoder).unwrap();

        // The rotated winner must carry the same score as the original
        // winner (index may differ when ties rotate past the tie-break).
        let best = base.per_candidate_scores[base.chosen_index];
        let best_rot = out_rot.per_candidate_scores[out_rot.chosen_index];
        prop_assert!((best - best_rot).abs() < 1e-12);
        // And without ties the chosen index maps exactly.
        let ties = base
            .per_candidate_scores
            .iter()
            .filter(|s| (**s - best).abs() < 1e-12)
            .count();
        if ties == 1 {
            prop_assert_eq!((out_rot.chosen_index + rot) % n, base.chosen_index);
        }
    }
}

#[test]
fn overlap_of_identical_outcomes_is_one() {
    let enc = HashedEncoder::new(64, 1);
    let sets: Vec<CandidateSet> = (0..10)
        .map(|i| CandidateSet {
            reply_id: format!("r{i}"),
            user_id: "u".to_string(),
            model_id: "m".to_string(),
            config_id: "c".to_string(),
            candidates: vec![
                format!("alpha {i}"),
                format!("beta {i}"),
                format!("gamma {i}"),
            ],
        })
        .collect();
    let outcomes: Vec<_> = sets
        .iter()
        .map(|s| select_cosine_optimal(s, "beta reference", &enc).unwrap())
        .collect();
    assert_eq!(overlap_rate(&outcomes, &outcomes).unwrap(), 1.0);
}

#[test]
fn word_count_bounds_type_count() {
    // Forced by construction; checked over the fixture generator's output.
    let pipeline = FeaturePipeline::builtin();
    for text in ctt_core::fixtures::casual_texts(100, 3) {
        let fv = pipeline.extract(&text).unwrap();
        assert!(fv.type_token_ratio <= 1.0);
    }
}

#[test]
fn hashed_encoder_embeddings_are_unit_or_zero() {
    let enc = HashedEncoder::new(128, 4);
    for text in ["", "one", "two words", "@m #h https://x.co 😀"] {
        let v = enc.embed(text).unwrap();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm.abs() < 1e-12 || (norm - 1.0).abs() < 1e-9);
    }
}
