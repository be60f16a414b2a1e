//! Plain-text and JSON reports.

use std::collections::BTreeMap;
use std::fmt::Write;

use podsum_core::cleanser::{build_training_set, CleanseConfig};
use podsum_core::eval::{GapDistribution, RougeReport, SystemReport, QUESTION_COUNT};
use podsum_core::features::select_candidates;
use podsum_core::labeler::{candidate_coverage, label_corpus};
use podsum_core::rouge::Prf;
use podsum_core::stats::{build_idf, DocView};
use podsum_core::{Episode, Split};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::records::EpisodeRecord;

const QUESTION_NAMES: [&str; QUESTION_COUNT] = [
    "Q1:names",
    "Q2:people",
    "Q3:topics",
    "Q4:format",
    "Q5:title",
    "Q6:redund",
    "Q7:english",
    "Q8:start/end",
];

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

pub fn rouge_table(report: &RougeReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<8} {:>8} {:>8} {:>8}",
        "metric", "P(%)", "R(%)", "F(%)"
    )
    .unwrap();
    let rows: [(&str, &Prf); 3] = [
        ("ROUGE-1", &report.rouge1),
        ("ROUGE-2", &report.rouge2),
        ("ROUGE-L", &report.rouge_l),
    ];
    for (name, p) in rows {
        writeln!(
            out,
            "{:<8} {:>8} {:>8} {:>8}",
            name,
            pct(p.precision),
            pct(p.recall),
            pct(p.f1)
        )
        .unwrap();
    }
    writeln!(out, "episodes: {}", report.episodes).unwrap();
    if !report.empty_summaries.is_empty() {
        writeln!(
            out,
            "empty summaries (scored as zero): {}",
            report.empty_summaries.join(", ")
        )
        .unwrap();
    }
    out
}

pub fn system_table(reports: &[SystemReport]) -> String {
    let mut out = String::new();
    write!(out, "{:<12} {:>5} {:>8}", "system", "n", "quality").unwrap();
    for q in QUESTION_NAMES {
        write!(out, " {q:>12}").unwrap();
    }
    out.push('\n');
    for r in reports {
        write!(
            out,
            "{:<12} {:>5} {:>8.3}",
            r.system_id, r.judged, r.mean_quality
        )
        .unwrap();
        for y in r.yes_rates {
            write!(out, " {:>12.3}", y).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn gap_table(rows: &[(String, GapDistribution)], baseline: &str) -> String {
    let mut out = String::new();
    writeln!(out, "gap vs {baseline} (% of episodes)").unwrap();
    write!(out, "{:<12}", "system").unwrap();
    for g in -3..=3 {
        write!(out, " {:>7}", format!("{g:+}")).unwrap();
    }
    writeln!(out, " {:>9}", ">=equal").unwrap();
    for (system, d) in rows {
        write!(out, "{system:<12}").unwrap();
        for p in d.percents {
            write!(out, " {p:>7.2}").unwrap();
        }
        writeln!(out, " {:>9.2}", d.equal_or_better).unwrap();
    }
    out
}

pub fn question_table(rows: &[(String, [f64; QUESTION_COUNT])]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "equal or better than the majority answer (% of episodes)"
    )
    .unwrap();
    write!(out, "{:<12}", "system").unwrap();
    for q in QUESTION_NAMES {
        write!(out, " {q:>12}").unwrap();
    }
    out.push('\n');
    for (system, v) in rows {
        write!(out, "{system:<12}").unwrap();
        for p in v {
            write!(out, " {p:>12.2}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Corpus-level statistics for checking a full-data run against reference figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub episodes_per_split: BTreeMap<Split, usize>,
    pub mean_segments: f64,
    pub mean_tokens: f64,
    pub training_pairs: usize,
    pub mean_description_words_raw: f64,
    pub mean_reference_words_before: f64,
    pub mean_reference_words_after: f64,
    pub positives: usize,
    pub negatives: usize,
    pub negatives_per_positive: Option<f64>,
    pub candidate_coverage: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsConfig {
    pub cleanse: CleanseConfig,
    pub head: usize,
    pub tail: usize,
    pub tau: f64,
}

/// Cleansing and labeling run over the training split; counts over all splits.
pub fn corpus_stats(records: &[EpisodeRecord], config: &StatsConfig) -> Result<CorpusStats> {
    let mut per_split = BTreeMap::new();
    for r in records {
        *per_split.entry(r.split).or_insert(0) += 1;
    }
    let all: Vec<&Episode> = records.iter().map(|r| &r.episode).collect();
    let n = all.len().max(1) as f64;
    let train: Vec<Episode> = records
        .iter()
        .filter(|r| r.split == Split::Train)
        .map(|r| r.episode.clone())
        .collect();
    let (pairs, raw, before, after) = if train.is_empty() {
        (0, 0.0, 0.0, 0.0)
    } else {
        let table = build_idf(&train, DocView::Descriptions)?;
        let set = build_training_set(&train, &table, &config.cleanse)?;
        (
            set.pairs.len(),
            set.mean_words_raw,
            set.mean_words_before,
            set.mean_words_after,
        )
    };
    let candidates: Vec<_> = train
        .iter()
        .map(|e| select_candidates(e, config.head, config.tail))
        .collect();
    let labels = label_corpus(&train, &candidates, config.tau)?;
    Ok(CorpusStats {
        episodes_per_split: per_split,
        mean_segments: all.iter().map(|e| e.segments.len()).sum::<usize>() as f64 / n,
        mean_tokens: all.iter().map(|e| e.token_count()).sum::<usize>() as f64 / n,
        training_pairs: pairs,
        mean_description_words_raw: raw,
        mean_reference_words_before: before,
        mean_reference_words_after: after,
        positives: labels.positives,
        negatives: labels.negatives,
        negatives_per_positive: labels.negatives_per_positive(),
        candidate_coverage: candidate_coverage(&train, &candidates, config.tau)?,
    })
}

pub fn stats_table(s: &CorpusStats) -> String {
    let mut out = String::new();
    for split in [Split::Train, Split::Valid, Split::Test] {
        writeln!(
            out,
            "episodes ({}): {}",
            split.as_str(),
            s.episodes_per_split.get(&split).copied().unwrap_or(0)
        )
        .unwrap();
    }
    writeln!(out, "mean segments per episode: {:.1}", s.mean_segments).unwrap();
    writeln!(out, "mean tokens per episode: {:.1}", s.mean_tokens).unwrap();
    writeln!(out, "cleansed training pairs: {}", s.training_pairs).unwrap();
    writeln!(
        out,
        "mean description words (all training episodes): {:.1}",
        s.mean_description_words_raw
    )
    .unwrap();
    writeln!(
        out,
        "mean reference words before -> after cleansing: {:.1} -> {:.1}",
        s.mean_reference_words_before, s.mean_reference_words_after
    )
    .unwrap();
    let ratio = s
        .negatives_per_positive
        .map_or(String::from("n/a"), |r| format!("1:{r:.1}"));
    writeln!(
        out,
        "candidate labels: {} positive, {} negative ({ratio})",
        s.positives, s.negatives
    )
    .unwrap();
    let coverage = s
        .candidate_coverage
        .map_or(String::from("n/a"), |c| format!("{:.1}%", 100.0 * c));
    writeln!(
        out,
        "positive segments inside candidate windows: {coverage}"
    )
    .unwrap();
    out
}
