//! ROUGE-N and ROUGE-L.
//!
//! ROUGE-N uses clipped multiset n-gram counts. When the reference holds fewer
//! than `n` tokens both precision and recall are defined as zero. No stemming
//! or stopword removal is applied; callers decide the tokenization.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::lowercase_tokens;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }

    pub const ONE: Prf = Prf {
        precision: 1.0,
        recall: 1.0,
        f1: 1.0,
    };
}

fn ngram_counts<T: Ord>(tokens: &[T], n: usize) -> BTreeMap<&[T], usize> {
    let mut counts = BTreeMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram overlap between a candidate and a reference.
pub fn rouge_n<T: Ord>(candidate: &[T], reference: &[T], n: usize) -> Result<Prf> {
    if n == 0 {
        return Err(Error::InvalidArgument(String::from(
            "rouge_n requires n >= 1",
        )));
    }
    if reference.len() < n {
        return Ok(Prf::default());
    }
    let ref_counts = ngram_counts(reference, n);
    let cand_counts = ngram_counts(candidate, n);
    let matched: usize = cand_counts
        .iter()
        .map(|(gram, &c)| c.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    let cand_total = candidate.len().saturating_sub(n - 1);
    let ref_total = reference.len() - (n - 1);
    let precision = matched as f64 / cand_total.max(1) as f64;
    let recall = matched as f64 / ref_total as f64;
    Ok(Prf::new(precision, recall))
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<T: PartialEq>(candidate: &[T], reference: &[T]) -> Prf {
    let l = lcs_len(candidate, reference) as f64;
    let ratio = |len: usize| if len == 0 { 0.0 } else { l / len as f64 };
    Prf::new(ratio(candidate.len()), ratio(reference.len()))
}

/// ROUGE-1, ROUGE-2 and ROUGE-L for one pair of texts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeScores {
    pub rouge1: Prf,
    pub rouge2: Prf,
    pub rouge_l: Prf,
}

/// Scores two texts on lowercased whitespace tokens.
pub fn score_texts(candidate: &str, reference: &str) -> RougeScores {
    let cand = lowercase_tokens(candidate);
    let reference = lowercase_tokens(reference);
    RougeScores {
        rouge1: rouge_n(&cand, &reference, 1).unwrap_or_default(),
        rouge2: rouge_n(&cand, &reference, 2).unwrap_or_default(),
        rouge_l: rouge_l(&cand, &reference),
    }
}
