//! Reference cleansing: drop creator-description sentences whose IDF salience
//! falls below a threshold, plus a character-length brevity filter.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Episode;
use crate::stats::IdfTable;
use crate::textnorm::{normalize_tokens, split_sentences};

pub const MIN_DESCRIPTION_CHARS: usize = 20;
pub const MAX_DESCRIPTION_CHARS: usize = 750;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleanseConfig {
    pub sigma: f64,
    pub min_occurrence: u64,
    pub min_idf: f64,
}

impl Default for CleanseConfig {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            min_occurrence: 5,
            min_idf: 1.5,
        }
    }
}

impl CleanseConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        if self.min_occurrence < 1 {
            return Err(Error::InvalidArgument(String::from(
                "min_occurrence must be >= 1",
            )));
        }
        if !self.min_idf.is_finite() {
            return Err(Error::InvalidArgument(String::from(
                "min_idf must be finite",
            )));
        }
        Ok(())
    }
}

/// Sum of IDF over eligible token occurrences. A token is eligible when it is
/// a word (never a placeholder), occurs at least `min_occurrence` times in the
/// corpus and has IDF strictly above `min_idf`.
pub fn sentence_salience(sentence: &str, table: &IdfTable, config: &CleanseConfig) -> f64 {
    normalize_tokens(sentence)
        .iter()
        .filter(|t| !t.is_placeholder() && table.frequency(&t.surface) >= config.min_occurrence)
        .map(|t| table.idf(&t.surface))
        .filter(|&idf| idf > config.min_idf)
        .sum()
}

/// Sentences of a description with their salience, in order.
pub fn score_sentences(
    description: &str,
    table: &IdfTable,
    config: &CleanseConfig,
) -> Vec<(String, f64)> {
    split_sentences(description)
        .into_iter()
        .map(|s| {
            let score = sentence_salience(&s, table, config);
            (s, score)
        })
        .collect()
}

/// Keeps sentences with salience at least `sigma`, joined by single spaces.
pub fn cleanse_description(description: &str, table: &IdfTable, config: &CleanseConfig) -> String {
    let kept: Vec<String> = score_sentences(description, table, config)
        .into_iter()
        .filter(|(_, score)| *score >= config.sigma)
        .map(|(s, _)| s)
        .collect();
    kept.join(" ")
}

/// Length criterion of the organizers' filter, in characters.
pub fn brevity_filter(description: &str) -> bool {
    let n = description.chars().count();
    (MIN_DESCRIPTION_CHARS..=MAX_DESCRIPTION_CHARS).contains(&n)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanPair {
    pub episode_id: String,
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub pairs: Vec<CleanPair>,
    /// Episodes examined.
    pub input_count: usize,
    /// Mean description length in words over all examined episodes.
    pub mean_words_raw: f64,
    /// Mean original length in words over the kept pairs.
    pub mean_words_before: f64,
    /// Mean cleaned length in words over the kept pairs.
    pub mean_words_after: f64,
}

fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

fn mean(total: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        total as f64 / n as f64
    }
}

/// Cleanses every episode's description, dropping those left empty.
pub fn build_training_set(
    episodes: &[Episode],
    table: &IdfTable,
    config: &CleanseConfig,
) -> Result<TrainingSet> {
    config.validate()?;
    let mut pairs = Vec::new();
    let (mut raw, mut before, mut after) = (0usize, 0usize, 0usize);
    for e in episodes {
        let n = word_count(&e.creator_description);
        raw += n;
        let reference = cleanse_description(&e.creator_description, table, config);
        if reference.is_empty() {
            continue;
        }
        before += n;
        after += word_count(&reference);
        pairs.push(CleanPair {
            episode_id: e.episode_id.clone(),
            reference,
        });
    }
    Ok(TrainingSet {
        input_count: episodes.len(),
        mean_words_raw: mean(raw, episodes.len()),
        mean_words_before: mean(before, pairs.len()),
        mean_words_after: mean(after, pairs.len()),
        pairs,
    })
}
