use std::collections::BTreeMap;

use podsum_core::backend::{DecodeConfig, ExtractiveSummarizer};
use podsum_core::cleanser::{cleanse_description, CleanseConfig};
use podsum_core::eval::{aggregate, compare, JudgmentRecord};
use podsum_core::features::{
    fit_binner, select_candidates, FEATURE_COUNT, SURFACE_DIM, SURFACE_ONES,
};
use podsum_core::postprocess::{clean_summary, dedup_cross_episode, PostprocessConfig};
use podsum_core::rouge::{rouge_l, rouge_n};
use podsum_core::selector::{select_source, truncate_lead};
use podsum_core::stats::{DocView, IdfTable};
use podsum_core::textnorm::{split_sentences, Tokenizer, WhitespaceTokenizer};
use podsum_core::{Episode, Segment, WordToken};
use proptest::prelude::*;

fn tokens(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..6, 0..max)
}

fn sentence() -> impl Strategy<Value = String> {
    let word = prop::sample::select(vec![
        "Alpha",
        "beta",
        "gamma",
        "delta",
        "Music",
        "show",
        "www.x.com/a",
        "(aside)",
        "[note",
        "end]",
        "---",
        "https://a.b",
        "#tag",
        "@me",
        "42",
    ]);
    (
        prop::collection::vec(word, 1..8),
        prop::sample::select(vec![".", "!", "?", ""]),
    )
        .prop_map(|(w, p)| format!("{}{}", w.join(" "), p))
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(sentence(), 0..6).prop_map(|s| s.join(" "))
}

fn description_table() -> IdfTable {
    let docs = [
        "Alpha beta gamma.",
        "Alpha beta.",
        "Alpha music.",
        "Alpha show.",
        "Alpha gamma.",
        "Delta.",
        "Delta beta.",
        "Delta show.",
        "Delta music.",
        "Delta gamma.",
        "beta gamma",
        "beta music",
        "show",
        "music gamma",
        "gamma",
        "beta",
    ];
    IdfTable::from_documents(docs, DocView::Descriptions).unwrap()
}

fn episode(lengths: &[usize]) -> Episode {
    Episode {
        episode_id: "ep".into(),
        show_id: String::new(),
        title: String::new(),
        creator_description: String::new(),
        segments: lengths
            .iter()
            .enumerate()
            .map(|(i, &n)| Segment {
                index: i,
                words: (0..n)
                    .map(|j| WordToken::new(format!("w{i}_{j}"), 0.0, 0.5))
                    .collect(),
            })
            .collect(),
    }
}

proptest! {
    #[test]
    fn rouge_scores_bounded(a in tokens(15), b in tokens(15)) {
        for n in 1..=3 {
            let p = rouge_n(&a, &b, n).unwrap();
            for v in [p.precision, p.recall, p.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        let l = rouge_l(&a, &b);
        prop_assert!((0.0..=1.0).contains(&l.f1));
    }

    #[test]
    fn rouge_swap_exchanges_precision_and_recall(a in tokens(15), b in tokens(15)) {
        prop_assume!(a.len() >= 2 && b.len() >= 2);
        let ab = rouge_n(&a, &b, 2).unwrap();
        let ba = rouge_n(&b, &a, 2).unwrap();
        prop_assert_eq!(ab.precision, ba.recall);
        prop_assert_eq!(ab.recall, ba.precision);
        let lab = rouge_l(&a, &b);
        let lba = rouge_l(&b, &a);
        prop_assert_eq!(lab.precision, lba.recall);
    }

    #[test]
    fn rouge_self_is_one(a in prop::collection::vec(0u8..6, 2..15)) {
        prop_assert_eq!(rouge_n(&a, &a, 2).unwrap().f1, 1.0);
        prop_assert_eq!(rouge_l(&a, &a).f1, 1.0);
    }

    #[test]
    fn cleanse_is_projection(d in text(), sigma in 0.0f64..12.0) {
        let table = description_table();
        let c = CleanseConfig { sigma, min_occurrence: 1, min_idf: 0.5 };
        let once = cleanse_description(&d, &table, &c);
        prop_assert_eq!(cleanse_description(&once, &table, &c), once);
    }

    #[test]
    fn cleanse_monotone_in_sigma(d in text(), s1 in 0.0f64..8.0, gap in 0.0f64..8.0) {
        let table = description_table();
        let lo = CleanseConfig { sigma: s1, min_occurrence: 1, min_idf: 0.5 };
        let hi = CleanseConfig { sigma: s1 + gap, ..lo };
        let kept_lo = split_sentences(&cleanse_description(&d, &table, &lo));
        let kept_hi = cleanse_description(&d, &table, &hi);
        // the stricter output is a subsequence of the looser one
        let mut it = kept_lo.iter();
        for s in split_sentences(&kept_hi) {
            prop_assert!(it.any(|k| k.contains(&s) || s.contains(k.as_str())));
        }
        prop_assert!(kept_hi.len() <= kept_lo.iter().map(|s| s.len() + 1).sum::<usize>());
    }

    #[test]
    fn cleanse_keeps_input_sentences(d in text()) {
        let table = description_table();
        let c = CleanseConfig { sigma: 3.0, min_occurrence: 1, min_idf: 0.5 };
        let input = split_sentences(&d);
        let mut it = input.iter();
        for s in split_sentences(&cleanse_description(&d, &table, &c)) {
            // each output sentence is an input sentence or a run of them
            prop_assert!(it.any(|k| s.starts_with(k.as_str())));
        }
    }

    #[test]
    fn clean_summary_idempotent_and_shrinking(s in text(), long in 1usize..20) {
        let c = PostprocessConfig { long_summary_tokens: long, ..PostprocessConfig::default() };
        let once = clean_summary(&s, &c);
        prop_assert_eq!(clean_summary(&once, &c), once.clone());
        prop_assert!(once.split_whitespace().count() <= s.split_whitespace().count());
    }

    #[test]
    fn dedup_order_invariant(summaries in prop::collection::vec(text(), 1..8)) {
        let pairs: Vec<(String, String)> =
            summaries.iter().enumerate().map(|(i, s)| (format!("e{i}"), s.clone())).collect();
        let c = PostprocessConfig::default();
        let forward = dedup_cross_episode(&pairs, &c);
        let mut rev = pairs.clone();
        rev.reverse();
        let mut backward = dedup_cross_episode(&rev, &c).summaries;
        backward.reverse();
        prop_assert_eq!(&forward.summaries, &backward);
        let ids: Vec<&String> = forward.summaries.iter().map(|(i, _)| i).collect();
        prop_assert_eq!(ids, pairs.iter().map(|(i, _)| i).collect::<Vec<_>>());
    }

    #[test]
    fn source_budget_law(lengths in prop::collection::vec(1usize..60, 1..50), budget in 1usize..200, seed in 0u64..1000) {
        let e = episode(&lengths);
        let c = select_candidates(&e, 33, 7);
        let probs: Vec<f64> = (0..c.len()).map(|i| ((i as u64 * 2654435761 + seed) % 97) as f64 / 97.0).collect();
        let s = select_source(&e, &c, &probs, budget, &WhitespaceTokenizer).unwrap();
        prop_assert!(s.token_count <= budget);
        prop_assert!(s.segment_indices.windows(2).all(|w| w[0] < w[1]));
        let lead = truncate_lead(&e, budget, &WhitespaceTokenizer).unwrap();
        prop_assert_eq!(lead.token_count, budget.min(e.token_count()));
    }

    #[test]
    fn extractive_output_is_prefix(s in text(), min in 0usize..10, extra in 0usize..20) {
        prop_assume!(!s.trim().is_empty());
        let config = DecodeConfig { min_length: min, max_length: min + extra, ..DecodeConfig::default() };
        let out = ExtractiveSummarizer::new(WhitespaceTokenizer).extract(&s, &config);
        let src: Vec<&str> = s.split_whitespace().collect();
        let got: Vec<&str> = out.split_whitespace().collect();
        prop_assert!(src.starts_with(&got));
        if src.len() >= min {
            prop_assert!(WhitespaceTokenizer.count(out) <= config.max_length);
        }
    }

    #[test]
    fn binarized_shape(rows in prop::collection::vec(prop::array::uniform12(-5.0f64..5.0), 1..30)) {
        let binner = fit_binner(&rows).unwrap();
        for r in &rows {
            let bits = binner.binarize(r).unwrap();
            prop_assert_eq!(bits.len, SURFACE_DIM);
            prop_assert_eq!(bits.count_ones(), SURFACE_ONES);
        }
        prop_assert_eq!(rows[0].len(), FEATURE_COUNT);
    }

    #[test]
    fn aggregate_permutation_invariant(qs in prop::collection::vec((0u8..4, any::<[bool; 8]>()), 1..30)) {
        let js: Vec<JudgmentRecord> = qs.iter().enumerate().map(|(i, (q, a))| JudgmentRecord {
            episode_id: format!("e{i}"), system_id: "s".into(), quality: *q, answers: *a,
        }).collect();
        let mut rev = js.clone();
        rev.reverse();
        let a = aggregate(&js, "s").unwrap();
        let b = aggregate(&rev, "s").unwrap();
        prop_assert!((a.mean_quality - b.mean_quality).abs() < 1e-12);
        prop_assert_eq!(a.yes_rates, b.yes_rates);
    }

    #[test]
    fn gap_buckets_partition(pairs in prop::collection::vec((0u8..4, 0u8..4), 1..40)) {
        let sys: BTreeMap<String, u8> = pairs.iter().enumerate().map(|(i, p)| (format!("e{i}"), p.0)).collect();
        let base: BTreeMap<String, u8> = pairs.iter().enumerate().map(|(i, p)| (format!("e{i}"), p.1)).collect();
        let g = compare(&sys, &base).unwrap();
        prop_assert_eq!(g.counts.iter().sum::<usize>(), pairs.len());
        prop_assert!((g.percents.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    }
}
