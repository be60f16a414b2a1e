//! Ground-truth salience labels for candidate segments.
//!
//! A segment's score is its best ROUGE-2 recall against any single sentence of
//! the creator description, on lowercased whitespace tokens. It is positive
//! when the score is strictly greater than `tau`.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::CandidateSet;
use crate::model::{Episode, Segment};
use crate::rouge::rouge_n;
use crate::textnorm::{lowercase_tokens, split_sentences};

pub const DEFAULT_TAU: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentLabel {
    pub episode_id: String,
    pub segment_index: usize,
    pub max_r2_recall: f64,
    pub positive: bool,
    pub threshold_tau: f64,
}

/// Tokenized description sentences, reusable across an episode's segments.
#[derive(Debug, Clone)]
pub struct DescriptionSentences(Vec<Vec<String>>);

impl DescriptionSentences {
    pub fn new(description: &str) -> Self {
        Self(
            split_sentences(description)
                .iter()
                .map(|s| lowercase_tokens(s))
                .filter(|t| t.len() >= 2)
                .collect(),
        )
    }

    /// Best ROUGE-2 recall of `tokens` against any sentence.
    pub fn max_recall(&self, tokens: &[String]) -> f64 {
        self.0
            .iter()
            .map(|sentence| {
                rouge_n(tokens, sentence, 2)
                    .map(|p| p.recall)
                    .unwrap_or(0.0)
            })
            .fold(0.0, f64::max)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!(
            "tau must lie in [0, 1], got {tau}"
        )))
    }
}

fn label_with(
    episode_id: &str,
    segment: &Segment,
    sentences: &DescriptionSentences,
    tau: f64,
) -> SegmentLabel {
    let tokens = lowercase_tokens(&segment.text());
    let score = sentences.max_recall(&tokens);
    SegmentLabel {
        episode_id: String::from(episode_id),
        segment_index: segment.index,
        max_r2_recall: score,
        positive: score > tau,
        threshold_tau: tau,
    }
}

pub fn label_segment(
    episode_id: &str,
    segment: &Segment,
    description: &str,
    tau: f64,
) -> Result<SegmentLabel> {
    check_tau(tau)?;
    Ok(label_with(
        episode_id,
        segment,
        &DescriptionSentences::new(description),
        tau,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSet {
    pub labels: Vec<SegmentLabel>,
    pub positives: usize,
    pub negatives: usize,
}

impl LabelSet {
    /// Negatives per positive, e.g. 18.0 for a 1:18 ratio.
    pub fn negatives_per_positive(&self) -> Option<f64> {
        (self.positives > 0).then(|| self.negatives as f64 / self.positives as f64)
    }
}

/// Labels every candidate segment; no resampling of either class.
pub fn label_corpus(
    episodes: &[Episode],
    candidates: &[CandidateSet],
    tau: f64,
) -> Result<LabelSet> {
    check_tau(tau)?;
    if episodes.len() != candidates.len() {
        return Err(Error::Misaligned(alloc::format!(
            "{} episodes but {} candidate sets",
            episodes.len(),
            candidates.len()
        )));
    }
    let mut labels = Vec::new();
    for (episode, cands) in episodes.iter().zip(candidates) {
        if episode.episode_id != cands.episode_id {
            return Err(Error::Misaligned(alloc::format!(
                "candidate set {} paired with episode {}",
                cands.episode_id,
                episode.episode_id
            )));
        }
        let sentences = DescriptionSentences::new(&episode.creator_description);
        labels.extend(
            cands
                .segments(episode)
                .map(|s| label_with(&episode.episode_id, s, &sentences, tau)),
        );
    }
    let positives = labels.iter().filter(|l| l.positive).count();
    let negatives = labels.len() - positives;
    Ok(LabelSet {
        labels,
        positives,
        negatives,
    })
}

/// Fraction of all positive segments (over whole transcripts) that fall inside
/// the candidate windows. `None` when the corpus has no positive segment.
pub fn candidate_coverage(
    episodes: &[Episode],
    candidates: &[CandidateSet],
    tau: f64,
) -> Result<Option<f64>> {
    check_tau(tau)?;
    let mut total = 0usize;
    let mut covered = 0usize;
    for (episode, cands) in episodes.iter().zip(candidates) {
        let sentences = DescriptionSentences::new(&episode.creator_description);
        for segment in &episode.segments {
            if label_with(&episode.episode_id, segment, &sentences, tau).positive {
                total += 1;
                if cands.indices.binary_search(&segment.index).is_ok() {
                    covered += 1;
                }
            }
        }
    }
    Ok((total > 0).then(|| covered as f64 / total as f64))
}
