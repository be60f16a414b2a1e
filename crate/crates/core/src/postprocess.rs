//! Output cleanup heuristics for generated summaries.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::{ends_sentence, is_url, split_sentences};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostprocessConfig {
    pub long_summary_tokens: usize,
    pub dedup_min_occurrences: usize,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        Self {
            long_summary_tokens: 128,
            dedup_min_occurrences: 3,
        }
    }
}

impl PostprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.long_summary_tokens < 1 || self.dedup_min_occurrences < 1 {
            return Err(Error::InvalidArgument(String::from(
                "long_summary_tokens and dedup_min_occurrences must be >= 1",
            )));
        }
        Ok(())
    }
}

/// (a) everything from the first token beginning with `---` on is dropped.
fn cut_at_dashes(tokens: &mut Vec<&str>) {
    if let Some(i) = tokens.iter().position(|t| t.starts_with("---")) {
        tokens.truncate(i);
    }
}

fn closer_of(c: char) -> Option<char> {
    match c {
        '(' => Some(')'),
        '[' => Some(']'),
        _ => None,
    }
}

/// (c) removes matched `(..)` / `[..]` spans with their content, nesting
/// included; unmatched brackets are removed alone.
pub fn strip_brackets(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut deleted = alloc::vec![false; chars.len()];
    let mut stack: Vec<(usize, char)> = Vec::new();
    for (i, &c) in chars.iter().enumerate() {
        if let Some(close) = closer_of(c) {
            stack.push((i, close));
        } else if c == ')' || c == ']' {
            match stack.iter().rposition(|&(_, close)| close == c) {
                Some(k) => {
                    let open = stack[k].0;
                    deleted[open..=i].iter_mut().for_each(|d| *d = true);
                    stack.truncate(k);
                }
                None => deleted[i] = true,
            }
        }
    }
    for (open, _) in stack {
        deleted[open] = true;
    }
    chars
        .iter()
        .zip(&deleted)
        .filter(|(_, &d)| !d)
        .map(|(c, _)| c)
        .collect()
}

fn heuristics_abc(text: &str) -> String {
    let mut tokens: Vec<&str> = text.split_whitespace().collect();
    cut_at_dashes(&mut tokens);
    tokens.retain(|t| !is_url(t));
    let joined = tokens.join(" ");
    strip_brackets(&joined)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Applies the cleanup heuristics in order:
/// (a) truncate at the first token beginning with `---`;
/// (b) delete URL tokens;
/// (c) delete bracketed spans;
/// (d) for summaries of at least `long_summary_tokens` tokens that do not end
///     a sentence, drop the trailing partial sentence.
///
/// (a)-(c) repeat until nothing changes, since bracket removal can join
/// characters into a new URL or `---` token. Whitespace is collapsed.
/// (d) leaves the text alone when no token ends a sentence.
pub fn clean_summary(summary: &str, config: &PostprocessConfig) -> String {
    let mut text = heuristics_abc(summary);
    loop {
        let next = heuristics_abc(&text);
        if next == text {
            break;
        }
        text = next;
    }
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() >= config.long_summary_tokens
        && !tokens.last().is_some_and(|t| ends_sentence(t))
    {
        if let Some(last) = tokens.iter().rposition(|t| ends_sentence(t)) {
            return tokens[..=last].join(" ");
        }
    }
    text
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedSentence {
    pub sentence: String,
    pub episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupOutcome {
    /// `(episode_id, summary)` in input order.
    pub summaries: Vec<(String, String)>,
    /// Removed sentences, sorted.
    pub removed: Vec<RemovedSentence>,
}

/// (e) removes every sentence that appears in at least
/// `dedup_min_occurrences` distinct episodes. Sentences compare exactly after
/// whitespace collapsing; repeats inside one episode count once.
pub fn dedup_cross_episode(
    summaries: &[(String, String)],
    config: &PostprocessConfig,
) -> DedupOutcome {
    let split: Vec<Vec<String>> = summaries.iter().map(|(_, s)| split_sentences(s)).collect();
    let mut episodes_of: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for ((id, _), sentences) in summaries.iter().zip(&split) {
        for s in sentences {
            episodes_of
                .entry(s.as_str())
                .or_default()
                .insert(id.as_str());
        }
    }
    let removed: BTreeMap<&str, usize> = episodes_of
        .iter()
        .filter(|(_, eps)| eps.len() >= config.dedup_min_occurrences)
        .map(|(s, eps)| (*s, eps.len()))
        .collect();
    let out = summaries
        .iter()
        .zip(&split)
        .map(|((id, _), sentences)| {
            let kept: Vec<&str> = sentences
                .iter()
                .map(String::as_str)
                .filter(|s| !removed.contains_key(s))
                .collect();
            (id.clone(), kept.join(" "))
        })
        .collect();
    DedupOutcome {
        summaries: out,
        removed: removed
            .into_iter()
            .map(|(s, n)| RemovedSentence {
                sentence: String::from(s),
                episodes: n,
            })
            .collect(),
    }
}
