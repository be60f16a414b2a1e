//! Glue between JSONL artifacts and the core algorithms.

use std::collections::{BTreeMap, HashMap};

use podsum_core::features::{
    candidate_scores, fit_binner, Binner, CandidateSet, SegmentFeatures, FEATURE_COUNT,
};
use podsum_core::labeler::SegmentLabel;
use podsum_core::selector::{
    CandidateInput, ContextProvider, EpisodeExample, StubProvider, ZeroProvider,
};
use podsum_core::stats::IdfTable;
use podsum_core::Episode;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PodsumError, Result};
use crate::service::ServiceClient;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Stub,
    Zero,
    Service,
}

/// Source of contextual segment embeddings.
#[derive(Debug, Clone)]
pub enum Provider {
    Stub,
    Zero,
    Service(ServiceClient),
}

impl Provider {
    pub fn embed(&self, texts: &[&str], dim: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            Provider::Stub => Ok(StubProvider.embed(texts, dim)?),
            Provider::Zero => Ok(ZeroProvider.embed(texts, dim)?),
            Provider::Service(c) => c.embed(texts, dim),
        }
    }
}

/// Pairs each candidate set with its episode, in candidate-file order.
pub fn pair_candidates<'a>(
    episodes: &'a [Episode],
    candidates: &'a [CandidateSet],
) -> Result<Vec<(&'a Episode, &'a CandidateSet)>> {
    let by_id: HashMap<&str, &Episode> = episodes
        .iter()
        .map(|e| (e.episode_id.as_str(), e))
        .collect();
    candidates
        .iter()
        .map(|c| {
            let e = by_id.get(c.episode_id.as_str()).ok_or_else(|| {
                PodsumError::invalid(format!(
                    "candidate set for unknown episode {}",
                    c.episode_id
                ))
            })?;
            if let Some(&bad) = c.indices.iter().find(|&&i| i >= e.segments.len()) {
                return Err(PodsumError::invalid(format!(
                    "candidate segment {bad} out of range for episode {} ({} segments)",
                    e.episode_id,
                    e.segments.len()
                )));
            }
            Ok((*e, c))
        })
        .collect()
}

/// Raw scores for every candidate, binarized with `binner` or with one
/// fitted on these scores. Output order follows `pairs`, then candidate order.
pub fn build_features(
    pairs: &[(&Episode, &CandidateSet)],
    table: &IdfTable,
    binner: Option<Binner>,
) -> Result<(Binner, Vec<SegmentFeatures>)> {
    let raw: Vec<Vec<[f64; FEATURE_COUNT]>> = pairs
        .par_iter()
        .map(|(e, c)| candidate_scores(e, c, table))
        .collect();
    let binner = match binner {
        Some(b) => {
            b.validate()?;
            b
        }
        None => {
            let all: Vec<[f64; FEATURE_COUNT]> = raw.iter().flatten().copied().collect();
            fit_binner(&all)?
        }
    };
    let features = pairs
        .par_iter()
        .zip(&raw)
        .map(|((e, c), scores)| {
            c.indices
                .iter()
                .zip(scores)
                .enumerate()
                .map(|(position, (&segment_index, raw))| {
                    Ok(SegmentFeatures {
                        episode_id: e.episode_id.clone(),
                        segment_index,
                        position,
                        raw: *raw,
                        binary: binner.binarize(raw)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((binner, features.into_iter().flatten().collect()))
}

/// Features grouped per episode, in position order; episodes keep first
/// appearance order.
pub fn group_features(
    features: Vec<SegmentFeatures>,
) -> Result<Vec<(String, Vec<SegmentFeatures>)>> {
    let mut groups: Vec<(String, Vec<SegmentFeatures>)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for f in features {
        let slot = *index.entry(f.episode_id.clone()).or_insert_with(|| {
            groups.push((f.episode_id.clone(), Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(f);
    }
    for (id, g) in &mut groups {
        g.sort_by_key(|f| f.position);
        if g.iter().enumerate().any(|(i, f)| f.position != i) {
            return Err(PodsumError::invalid(format!(
                "episode {id}: candidate positions are not 0..n"
            )));
        }
    }
    Ok(groups)
}

/// Network inputs for one episode's candidates.
pub fn candidate_inputs(
    episode: &Episode,
    features: &[SegmentFeatures],
    provider: &Provider,
    dim: usize,
) -> Result<Vec<CandidateInput>> {
    let texts: Vec<String> = features
        .iter()
        .map(|f| {
            episode
                .segments
                .get(f.segment_index)
                .map(|s| s.text())
                .ok_or_else(|| {
                    PodsumError::invalid(format!(
                        "episode {}: no segment {}",
                        episode.episode_id, f.segment_index
                    ))
                })
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let contexts = provider.embed(&refs, dim)?;
    Ok(contexts
        .into_iter()
        .zip(features)
        .map(|(context, f)| CandidateInput {
            context,
            surface: f.binary.clone(),
        })
        .collect())
}

/// Training examples from features, labels and the episodes' text.
pub fn training_examples(
    episodes: &[Episode],
    features: Vec<SegmentFeatures>,
    labels: &[SegmentLabel],
    provider: &Provider,
    dim: usize,
) -> Result<Vec<EpisodeExample>> {
    let by_id: HashMap<&str, &Episode> = episodes
        .iter()
        .map(|e| (e.episode_id.as_str(), e))
        .collect();
    let label_of: BTreeMap<(&str, usize), bool> = labels
        .iter()
        .map(|l| ((l.episode_id.as_str(), l.segment_index), l.positive))
        .collect();
    group_features(features)?
        .par_iter()
        .map(|(id, feats)| {
            let episode = by_id.get(id.as_str()).ok_or_else(|| {
                PodsumError::invalid(format!("features for unknown episode {id}"))
            })?;
            let labels = feats
                .iter()
                .map(|f| {
                    label_of
                        .get(&(id.as_str(), f.segment_index))
                        .copied()
                        .ok_or_else(|| {
                            PodsumError::invalid(format!(
                                "no label for episode {id} segment {}",
                                f.segment_index
                            ))
                        })
                })
                .collect::<Result<Vec<bool>>>()?;
            Ok(EpisodeExample {
                episode_id: id.clone(),
                inputs: candidate_inputs(episode, feats, provider, dim)?,
                labels,
            })
        })
        .collect()
}
