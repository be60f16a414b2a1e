//! Building the token-budgeted source text handed to the summarizer.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::CandidateSet;
use crate::model::Episode;
use crate::textnorm::Tokenizer;

/// Default source budget in tokens.
pub const DEFAULT_BUDGET: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceText {
    pub episode_id: String,
    /// Contributing segment indices, strictly increasing.
    pub segment_indices: Vec<usize>,
    pub text: String,
    pub token_count: usize,
}

/// Greedy selection by descending probability (ties go to the earlier
/// candidate). A segment that would overflow the budget is skipped, except
/// when nothing has been admitted yet, in which case it is cut at a token
/// boundary to fill the budget. Admitted segments are joined in transcript
/// order.
pub fn select_source(
    episode: &Episode,
    candidates: &CandidateSet,
    probs: &[f64],
    budget: usize,
    tokenizer: &dyn Tokenizer,
) -> Result<SourceText> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("candidate list"));
    }
    if probs.len() != candidates.len() {
        return Err(Error::ShapeMismatch {
            what: "salience probabilities",
            expected: candidates.len(),
            found: probs.len(),
        });
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));

    let mut admitted: Vec<(usize, String)> = Vec::new();
    let mut used = 0usize;
    for pos in order {
        let index = candidates.indices[pos];
        let segment = episode.segments.get(index).ok_or_else(|| {
            Error::InvalidArgument(alloc::format!(
                "segment {index} not in episode {}",
                episode.episode_id
            ))
        })?;
        let text = segment.text();
        let count = tokenizer.count(&text);
        if used + count <= budget {
            used += count;
            admitted.push((index, text));
        } else if admitted.is_empty() {
            let cut = tokenizer.truncate(&text, budget - used);
            if !cut.is_empty() {
                used += tokenizer.count(cut);
                admitted.push((index, String::from(cut)));
            }
        }
    }
    admitted.sort_by_key(|(i, _)| *i);
    Ok(finish(episode, admitted, budget, tokenizer))
}

fn finish(
    episode: &Episode,
    parts: Vec<(usize, String)>,
    budget: usize,
    tokenizer: &dyn Tokenizer,
) -> SourceText {
    let segment_indices: Vec<usize> = parts.iter().map(|(i, _)| *i).collect();
    let texts: Vec<&str> = parts.iter().map(|(_, t)| t.as_str()).collect();
    let joined = texts.join(" ");
    // joining can change subword counts; keep the budget exact
    let text = String::from(tokenizer.truncate(&joined, budget));
    SourceText {
        episode_id: episode.episode_id.clone(),
        segment_indices,
        token_count: tokenizer.count(&text),
        text,
    }
}

/// The first `budget` tokens of the transcript.
pub fn truncate_lead(
    episode: &Episode,
    budget: usize,
    tokenizer: &dyn Tokenizer,
) -> Result<SourceText> {
    if episode.token_count() == 0 {
        return Err(Error::EmptyInput("transcript"));
    }
    let mut parts = Vec::new();
    let mut used = 0usize;
    for segment in &episode.segments {
        if used >= budget {
            break;
        }
        let text = segment.text();
        let count = tokenizer.count(&text);
        if used + count <= budget {
            used += count;
            parts.push((segment.index, text));
        } else {
            let cut = tokenizer.truncate(&text, budget - used);
            used = budget;
            if !cut.is_empty() {
                parts.push((segment.index, String::from(cut)));
            }
        }
    }
    Ok(finish(episode, parts, budget, tokenizer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::select_candidates;
    use crate::model::{Segment, WordToken};
    use crate::textnorm::WhitespaceTokenizer;
    use alloc::format;
    use alloc::vec;

    fn episode(lengths: &[usize]) -> Episode {
        Episode {
            episode_id: String::from("ep"),
            show_id: String::new(),
            title: String::new(),
            creator_description: String::new(),
            segments: lengths
                .iter()
                .enumerate()
                .map(|(i, &n)| Segment {
                    index: i,
                    words: (0..n)
                        .map(|j| WordToken::new(format!("s{i}w{j}"), 0.0, 0.1))
                        .collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn all_fit_in_transcript_order() {
        let e = episode(&[3, 4, 2]);
        let c = select_candidates(&e, 33, 7);
        let s = select_source(&e, &c, &[0.1, 0.9, 0.5], 100, &WhitespaceTokenizer).unwrap();
        assert_eq!(s.segment_indices, vec![0, 1, 2]);
        assert_eq!(s.token_count, 9);
        assert_eq!(s.text, e.transcript_text());
    }

    #[test]
    fn first_admitted_is_truncated() {
        let e = episode(&[7, 3]);
        let c = select_candidates(&e, 33, 7);
        let s = select_source(&e, &c, &[0.9, 0.1], 5, &WhitespaceTokenizer).unwrap();
        // hand trace: segment 0 (7 words) overflows but is first, cut to 5;
        // segment 1 (3 words) would overflow and is skipped
        assert_eq!(s.segment_indices, vec![0]);
        assert_eq!(s.text, "s0w0 s0w1 s0w2 s0w3 s0w4");
        assert_eq!(s.token_count, 5);
    }

    #[test]
    fn overflow_skipped_selection_continues() {
        let e = episode(&[4, 6, 2]);
        let c = select_candidates(&e, 33, 7);
        let s = select_source(&e, &c, &[0.9, 0.8, 0.7], 7, &WhitespaceTokenizer).unwrap();
        assert_eq!(s.segment_indices, vec![0, 2]);
        assert_eq!(s.token_count, 6);
    }

    #[test]
    fn ties_prefer_earlier() {
        let e = episode(&[3, 3]);
        let c = select_candidates(&e, 33, 7);
        let s = select_source(&e, &c, &[0.5, 0.5], 3, &WhitespaceTokenizer).unwrap();
        assert_eq!(s.segment_indices, vec![0]);
    }

    #[test]
    fn errors() {
        let e = episode(&[3]);
        let mut c = select_candidates(&e, 33, 7);
        assert!(select_source(&e, &c, &[0.1, 0.2], 10, &WhitespaceTokenizer).is_err());
        c.indices.clear();
        assert!(select_source(&e, &c, &[], 10, &WhitespaceTokenizer).is_err());
        assert!(truncate_lead(&episode(&[]), 10, &WhitespaceTokenizer).is_err());
    }

    #[test]
    fn lead_truncation() {
        let e = episode(&[80; 10]);
        let s = truncate_lead(&e, 100, &WhitespaceTokenizer).unwrap();
        assert_eq!(s.token_count, 100);
        assert_eq!(s.segment_indices, vec![0, 1]);
        let short = truncate_lead(&e, 5000, &WhitespaceTokenizer).unwrap();
        assert_eq!(short.token_count, 800);
        assert_eq!(short.text, e.transcript_text());
    }
}
