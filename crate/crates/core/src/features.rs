//! Candidate windows, per-segment surface scores and prime-bin binarization.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Episode, Segment};
use crate::stats::{IdfTable, TermCounts};
use crate::textnorm::normalize_word;

pub const DEFAULT_HEAD: usize = 33;
pub const DEFAULT_TAIL: usize = 7;

/// Bin counts used to discretize every feature.
pub const PRIME_BIN_SIZES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
pub const FEATURE_COUNT: usize = 12;
pub const BLOCK_WIDTH: usize = sum_bins();
pub const SURFACE_DIM: usize = FEATURE_COUNT * BLOCK_WIDTH;
/// Set bits per binarized vector: one per (feature, bin size) block.
pub const SURFACE_ONES: usize = FEATURE_COUNT * PRIME_BIN_SIZES.len();

const fn sum_bins() -> usize {
    let mut total = 0;
    let mut i = 0;
    while i < PRIME_BIN_SIZES.len() {
        total += PRIME_BIN_SIZES[i];
        i += 1;
    }
    total
}

const _: () = assert!(BLOCK_WIDTH == 197);
const _: () = assert!(SURFACE_DIM == 2364);

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "tfidf_sum",
    "tfidf_avg",
    "dur_sum",
    "dur_avg",
    "tfidf_top5_avg",
    "tfidf_top10_avg",
    "tfidf_top15_avg",
    "tfidf_top20_avg",
    "dur_top5_avg",
    "dur_top10_avg",
    "dur_top15_avg",
    "dur_top20_avg",
];

const TOP_K: [usize; 4] = [5, 10, 15, 20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub episode_id: alloc::string::String,
    /// Segment indices in transcript order.
    pub indices: Vec<usize>,
    pub head_count: usize,
    pub tail_count: usize,
}

impl CandidateSet {
    pub fn segments<'a>(&'a self, episode: &'a Episode) -> impl Iterator<Item = &'a Segment> + 'a {
        self.indices.iter().map(move |&i| &episode.segments[i])
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// The first `head` and last `tail` segments, or all of them when the episode
/// is no longer than `head + tail`.
pub fn select_candidates(episode: &Episode, head: usize, tail: usize) -> CandidateSet {
    let n = episode.segments.len();
    let indices = if n <= head + tail {
        (0..n).collect()
    } else {
        (0..head).chain(n - tail..n).collect()
    };
    CandidateSet {
        episode_id: episode.episode_id.clone(),
        indices,
        head_count: head,
        tail_count: tail,
    }
}

fn top_k_mean(sorted_desc: &[f64], k: usize) -> f64 {
    let k = k.min(sorted_desc.len());
    if k == 0 {
        return 0.0;
    }
    sorted_desc[..k].iter().sum::<f64>() / k as f64
}

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps earlier words first on ties
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order.into_iter().map(|i| values[i]).collect()
}

/// The twelve raw surface scores of a segment, in [`FEATURE_NAMES`] order.
///
/// `terms` holds the episode-wide term counts, so a word's TF-IDF is
/// episode-global and the segment aggregates its words' scores.
pub fn segment_scores(
    segment: &Segment,
    terms: &TermCounts,
    table: &IdfTable,
) -> [f64; FEATURE_COUNT] {
    let tfidf: Vec<f64> = segment
        .words
        .iter()
        .map(|w| match normalize_word(&w.text) {
            Some(tok) => terms.tfidf(&tok.surface, table),
            None => 0.0,
        })
        .collect();
    let durations: Vec<f64> = segment.words.iter().map(|w| w.duration()).collect();
    aggregate_scores(&tfidf, &durations)
}

/// Sum, mean and top-k means of per-word TF-IDF scores and durations.
pub fn aggregate_scores(tfidf: &[f64], durations: &[f64]) -> [f64; FEATURE_COUNT] {
    let n = tfidf.len().max(1) as f64;
    let tfidf_sum: f64 = tfidf.iter().sum();
    let dur_sum: f64 = durations.iter().sum();
    let tfidf_sorted = sorted_desc(tfidf);
    let dur_sorted = sorted_desc(durations);

    let mut out = [0.0; FEATURE_COUNT];
    out[0] = tfidf_sum;
    out[1] = tfidf_sum / n;
    out[2] = dur_sum;
    out[3] = dur_sum / n;
    for (i, &k) in TOP_K.iter().enumerate() {
        out[4 + i] = top_k_mean(&tfidf_sorted, k);
        out[8 + i] = top_k_mean(&dur_sorted, k);
    }
    out
}

pub fn feature_scores(
    segment: &Segment,
    episode: &Episode,
    table: &IdfTable,
) -> [f64; FEATURE_COUNT] {
    segment_scores(segment, &TermCounts::from_episode(episode), table)
}

/// A fixed-length bit vector stored as its sorted set positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseBits {
    pub len: usize,
    pub ones: Vec<u32>,
}

impl SparseBits {
    pub fn count_ones(&self) -> usize {
        self.ones.len()
    }

    pub fn get(&self, i: usize) -> bool {
        self.ones.binary_search(&(i as u32)).is_ok()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.ones.iter().map(|&i| i as usize)
    }

    pub fn to_dense(&self) -> Vec<bool> {
        let mut v = alloc::vec![false; self.len];
        for i in self.iter_ones() {
            v[i] = true;
        }
        v
    }
}

/// Quantile boundaries per feature and bin size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binner {
    /// `boundaries[f][j]` holds the `PRIME_BIN_SIZES[j] - 1` cut points of feature `f`.
    pub boundaries: Vec<Vec<Vec<f64>>>,
}

/// Fits quantile boundaries at `j/b`, `j = 1..b`, using lower interpolation:
/// the value at index `floor(j * (n - 1) / b)` of the sorted feature values.
pub fn fit_binner(scores: &[[f64; FEATURE_COUNT]]) -> Result<Binner> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("candidate scores"));
    }
    let n = scores.len();
    let boundaries = (0..FEATURE_COUNT)
        .map(|f| {
            let mut values: Vec<f64> = scores.iter().map(|s| s[f]).collect();
            values.sort_by(f64::total_cmp);
            PRIME_BIN_SIZES
                .iter()
                .map(|&b| (1..b).map(|j| values[j * (n - 1) / b]).collect())
                .collect()
        })
        .collect();
    Ok(Binner { boundaries })
}

impl Binner {
    /// Position within a block of `b` bins: the number of cut points strictly
    /// below `value`, so values equal to a cut point fall in the lower bin.
    fn bin_of(cuts: &[f64], value: f64) -> usize {
        cuts.partition_point(|&c| c < value)
    }

    pub fn validate(&self) -> Result<()> {
        if self.boundaries.len() != FEATURE_COUNT {
            return Err(Error::ShapeMismatch {
                what: "binner features",
                expected: FEATURE_COUNT,
                found: self.boundaries.len(),
            });
        }
        for per_feature in &self.boundaries {
            if per_feature.len() != PRIME_BIN_SIZES.len() {
                return Err(Error::ShapeMismatch {
                    what: "binner bin sizes",
                    expected: PRIME_BIN_SIZES.len(),
                    found: per_feature.len(),
                });
            }
            for (cuts, &b) in per_feature.iter().zip(&PRIME_BIN_SIZES) {
                if cuts.len() != b - 1 {
                    return Err(Error::ShapeMismatch {
                        what: "binner cut points",
                        expected: b - 1,
                        found: cuts.len(),
                    });
                }
                if cuts.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::InvalidArgument(alloc::string::String::from(
                        "binner cut points must be non-decreasing",
                    )));
                }
            }
        }
        Ok(())
    }

    /// One-hot blocks, feature-major then bin size ascending, concatenated.
    pub fn binarize(&self, raw: &[f64]) -> Result<SparseBits> {
        if raw.len() != FEATURE_COUNT {
            return Err(Error::ShapeMismatch {
                what: "raw feature vector",
                expected: FEATURE_COUNT,
                found: raw.len(),
            });
        }
        self.validate()?;
        let mut ones = Vec::with_capacity(SURFACE_ONES);
        let mut offset = 0;
        for (f, &value) in raw.iter().enumerate() {
            for (j, &b) in PRIME_BIN_SIZES.iter().enumerate() {
                ones.push((offset + Self::bin_of(&self.boundaries[f][j], value)) as u32);
                offset += b;
            }
        }
        Ok(SparseBits {
            len: SURFACE_DIM,
            ones,
        })
    }
}

pub fn binarize(raw: &[f64], binner: &Binner) -> Result<SparseBits> {
    binner.binarize(raw)
}

/// Raw scores and binarized vector of one candidate segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentFeatures {
    pub episode_id: alloc::string::String,
    pub segment_index: usize,
    /// Position in the candidate sequence.
    pub position: usize,
    pub raw: [f64; FEATURE_COUNT],
    pub binary: SparseBits,
}

/// Raw scores of every candidate of an episode.
pub fn candidate_scores(
    episode: &Episode,
    candidates: &CandidateSet,
    table: &IdfTable,
) -> Vec<[f64; FEATURE_COUNT]> {
    let terms = TermCounts::from_episode(episode);
    candidates
        .segments(episode)
        .map(|s| segment_scores(s, &terms, table))
        .collect()
}
