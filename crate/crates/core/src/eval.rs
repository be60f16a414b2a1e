//! Evaluation aggregates: human-judgment reports, majority-baseline
//! comparisons and ROUGE tables.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rouge::{score_texts, Prf};

pub const QUESTION_COUNT: usize = 8;
pub const MAX_QUALITY: u8 = 3;
/// Zero-based index of the redundancy question, where "no" is the good answer.
pub const REDUNDANCY_QUESTION: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentRecord {
    pub episode_id: String,
    pub system_id: String,
    pub quality: u8,
    pub answers: [bool; QUESTION_COUNT],
}

impl JudgmentRecord {
    pub fn validate(&self) -> Result<()> {
        if self.quality > MAX_QUALITY {
            return Err(Error::InvalidArgument(alloc::format!(
                "quality {} out of range 0..=3 for {}/{}",
                self.quality,
                self.system_id,
                self.episode_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub system_id: String,
    pub judged: usize,
    pub mean_quality: f64,
    pub yes_rates: [f64; QUESTION_COUNT],
}

/// Mean quality and per-question yes rate over one system's judgments.
pub fn aggregate(judgments: &[JudgmentRecord], system_id: &str) -> Result<SystemReport> {
    let mut judged = 0usize;
    let mut quality = 0u64;
    let mut yes = [0usize; QUESTION_COUNT];
    for j in judgments.iter().filter(|j| j.system_id == system_id) {
        j.validate()?;
        judged += 1;
        quality += u64::from(j.quality);
        for (y, &a) in yes.iter_mut().zip(&j.answers) {
            *y += usize::from(a);
        }
    }
    if judged == 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "no judgments for system {system_id}"
        )));
    }
    Ok(SystemReport {
        system_id: String::from(system_id),
        judged,
        mean_quality: quality as f64 / judged as f64,
        yes_rates: yes.map(|y| y as f64 / judged as f64),
    })
}

/// Most frequent value; ties go to the lowest.
fn mode<T: Ord + Copy>(values: impl IntoIterator<Item = T>) -> Option<T> {
    let mut counts: BTreeMap<T, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    // max_by_key keeps the last maximum, so scan from the top down
    counts
        .into_iter()
        .rev()
        .max_by_key(|&(_, c)| c)
        .map(|(v, _)| v)
}

/// Mode of the ratings; ties go to the lower rating.
pub fn majority_rating(ratings: &[u8]) -> Result<u8> {
    mode(ratings.iter().copied()).ok_or(Error::EmptyInput("ratings"))
}

/// Per-episode quality ratings of one system.
pub fn system_ratings(judgments: &[JudgmentRecord], system_id: &str) -> BTreeMap<String, u8> {
    judgments
        .iter()
        .filter(|j| j.system_id == system_id)
        .map(|j| (j.episode_id.clone(), j.quality))
        .collect()
}

/// Per-episode majority quality rating across every system.
pub fn majority_baseline(judgments: &[JudgmentRecord]) -> BTreeMap<String, u8> {
    let mut by_episode: BTreeMap<&str, Vec<u8>> = BTreeMap::new();
    for j in judgments {
        by_episode.entry(&j.episode_id).or_default().push(j.quality);
    }
    by_episode
        .into_iter()
        .filter_map(|(e, r)| mode(r).map(|m| (String::from(e), m)))
        .collect()
}

/// Distribution of per-episode gaps `system - baseline` over -3..=3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapDistribution {
    pub episodes: usize,
    /// Index `g + 3` holds the count for gap `g`.
    pub counts: [usize; 7],
    pub percents: [f64; 7],
    pub equal_or_better: f64,
}

impl GapDistribution {
    pub fn count(&self, gap: i32) -> usize {
        self.counts[(gap + 3) as usize]
    }

    pub fn percent(&self, gap: i32) -> f64 {
        self.percents[(gap + 3) as usize]
    }
}

fn check_aligned<A, B>(system: &BTreeMap<String, A>, baseline: &BTreeMap<String, B>) -> Result<()> {
    if system.is_empty() {
        return Err(Error::EmptyInput("system ratings"));
    }
    if let Some(id) = system.keys().find(|k| !baseline.contains_key(*k)) {
        return Err(Error::Misaligned(alloc::format!(
            "episode {id} missing from baseline"
        )));
    }
    if let Some(id) = baseline.keys().find(|k| !system.contains_key(*k)) {
        return Err(Error::Misaligned(alloc::format!(
            "episode {id} missing from system"
        )));
    }
    Ok(())
}

pub fn compare(
    system: &BTreeMap<String, u8>,
    baseline: &BTreeMap<String, u8>,
) -> Result<GapDistribution> {
    check_aligned(system, baseline)?;
    let mut counts = [0usize; 7];
    for (id, &s) in system {
        let b = baseline[id];
        if s > MAX_QUALITY || b > MAX_QUALITY {
            return Err(Error::InvalidArgument(alloc::format!(
                "rating out of range for episode {id}"
            )));
        }
        counts[(i32::from(s) - i32::from(b) + 3) as usize] += 1;
    }
    let n = system.len();
    let percents = counts.map(|c| 100.0 * c as f64 / n as f64);
    Ok(GapDistribution {
        episodes: n,
        counts,
        percents,
        equal_or_better: 100.0 * counts[3..].iter().sum::<usize>() as f64 / n as f64,
    })
}

/// Per-question percentage of episodes where the system's answer is equal to
/// or better than the majority answer across all systems. "Yes" is better,
/// except for the redundancy question where "no" is. Majority ties go to "no".
pub fn question_equal_or_better(
    judgments: &[JudgmentRecord],
    system_id: &str,
) -> Result<[f64; QUESTION_COUNT]> {
    let mut by_episode: BTreeMap<&str, Vec<[bool; QUESTION_COUNT]>> = BTreeMap::new();
    for j in judgments {
        by_episode.entry(&j.episode_id).or_default().push(j.answers);
    }
    let system: BTreeMap<String, [bool; QUESTION_COUNT]> = judgments
        .iter()
        .filter(|j| j.system_id == system_id)
        .map(|j| (j.episode_id.clone(), j.answers))
        .collect();
    if system.is_empty() {
        return Err(Error::InvalidArgument(alloc::format!(
            "no judgments for system {system_id}"
        )));
    }
    let mut wins = [0usize; QUESTION_COUNT];
    for (id, answers) in &system {
        let all = &by_episode[id.as_str()];
        for q in 0..QUESTION_COUNT {
            let majority = mode(all.iter().map(|a| a[q])).unwrap_or(false);
            let (s, m) = if q == REDUNDANCY_QUESTION {
                (!answers[q], !majority)
            } else {
                (answers[q], majority)
            };
            wins[q] += usize::from(s >= m);
        }
    }
    Ok(wins.map(|w| 100.0 * w as f64 / system.len() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RougeReport {
    pub episodes: usize,
    pub rouge1: Prf,
    pub rouge2: Prf,
    pub rouge_l: Prf,
    /// Episodes whose system summary was empty; they contribute zeros.
    pub empty_summaries: Vec<String>,
}

fn mean_prf(items: &[Prf]) -> Prf {
    let n = items.len() as f64;
    Prf {
        precision: items.iter().map(|p| p.precision).sum::<f64>() / n,
        recall: items.iter().map(|p| p.recall).sum::<f64>() / n,
        f1: items.iter().map(|p| p.f1).sum::<f64>() / n,
    }
}

/// Macro average of per-episode ROUGE-1/2/L over `(episode_id, summary)` pairs.
pub fn rouge_report(
    system: &[(String, String)],
    references: &BTreeMap<String, String>,
) -> Result<RougeReport> {
    if system.is_empty() {
        return Err(Error::EmptyInput("system summaries"));
    }
    let mut r1 = Vec::with_capacity(system.len());
    let mut r2 = Vec::with_capacity(system.len());
    let mut rl = Vec::with_capacity(system.len());
    let mut empty = Vec::new();
    for (id, summary) in system {
        let reference = references
            .get(id)
            .ok_or_else(|| Error::MissingReference(id.clone()))?;
        if summary.trim().is_empty() {
            empty.push(id.clone());
        }
        let s = score_texts(summary, reference);
        r1.push(s.rouge1);
        r2.push(s.rouge2);
        rl.push(s.rouge_l);
    }
    Ok(RougeReport {
        episodes: system.len(),
        rouge1: mean_prf(&r1),
        rouge2: mean_prf(&r2),
        rouge_l: mean_prf(&rl),
        empty_summaries: empty,
    })
}
