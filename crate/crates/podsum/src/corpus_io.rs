//! Transcript documents, metadata tables and corpus manifests.
//!
//! A transcript is one JSON document per episode:
//! `{"episode_id", "show_id", "title", "segments": [{"words": [{"w", "s", "e"}]}]}`.
//! Creator descriptions come from a JSONL metadata table of
//! `{"episode_id", "description"}` lines. A manifest is JSONL holding one
//! header line `{"metadata": path, "split": "train"|"valid"|"test"}` and one
//! `{"transcript": path}` line per episode; relative paths resolve against the
//! manifest's directory.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use podsum_core::{Corpus, Episode, Segment, Split, WordToken};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PodsumError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptDoc {
    pub episode_id: String,
    #[serde(default)]
    pub show_id: String,
    #[serde(default)]
    pub title: String,
    pub segments: Vec<SegmentDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDoc {
    pub words: Vec<WordDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordDoc {
    pub w: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
}

/// Byte offset of a 1-based line and column.
fn byte_offset(raw: &[u8], line: usize, column: usize) -> usize {
    let line_start: usize = raw
        .split_inclusive(|&b| b == b'\n')
        .take(line.saturating_sub(1))
        .map(<[u8]>::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(raw.len())
}

pub(crate) fn json_error(path: &Path, raw: &[u8], e: &serde_json::Error) -> PodsumError {
    PodsumError::Parse {
        path: path.to_path_buf(),
        offset: byte_offset(raw, e.line(), e.column()),
        message: e.to_string(),
    }
}

fn word_times(path: &Path, seg: usize, idx: usize, w: &WordDoc) -> Result<(f64, f64)> {
    let (s, e) = match (w.s, w.e) {
        (Some(s), Some(e)) => (s, e),
        (None, None) => {
            warn!(
                "{}: segment {seg} word {idx} {:?} has no timing; using 0",
                path.display(),
                w.w
            );
            (0.0, 0.0)
        }
        (Some(t), None) | (None, Some(t)) => {
            warn!(
                "{}: segment {seg} word {idx} {:?} has one time; using zero duration",
                path.display(),
                w.w
            );
            (t, t)
        }
    };
    if s < 0.0 {
        return Err(PodsumError::invalid(format!(
            "{}: segment {seg} word {idx} {:?} starts before 0 ({s})",
            path.display(),
            w.w
        )));
    }
    if e < s {
        return Err(PodsumError::invalid(format!(
            "{}: segment {seg} word {idx} {:?} ends at {e} before its start {s}",
            path.display(),
            w.w
        )));
    }
    Ok((s, e))
}

/// Converts a parsed document, checking word and segment invariants.
pub fn episode_from_doc(
    doc: TranscriptDoc,
    description: Option<&str>,
    origin: &Path,
) -> Result<Episode> {
    let mut segments = Vec::with_capacity(doc.segments.len());
    for (index, seg) in doc.segments.into_iter().enumerate() {
        if seg.words.is_empty() {
            return Err(PodsumError::invalid(format!(
                "{}: segment {index} has no words",
                origin.display()
            )));
        }
        let mut words = Vec::with_capacity(seg.words.len());
        let mut last_start = f64::NEG_INFINITY;
        for (i, w) in seg.words.iter().enumerate() {
            if w.w.trim().is_empty() {
                return Err(PodsumError::invalid(format!(
                    "{}: segment {index} word {i} is empty",
                    origin.display()
                )));
            }
            let (s, e) = word_times(origin, index, i, w)?;
            if s < last_start {
                warn!(
                    "{}: segment {index} word {i} starts before the previous word",
                    origin.display()
                );
            }
            last_start = s;
            words.push(WordToken::new(w.w.clone(), s, e));
        }
        segments.push(Segment { index, words });
    }
    Ok(Episode {
        episode_id: doc.episode_id,
        show_id: doc.show_id,
        title: doc.title,
        creator_description: description.unwrap_or_default().to_string(),
        segments,
    })
}

/// Parses one transcript document. `origin` names the source in errors.
pub fn parse_transcript(raw: &[u8], description: Option<&str>, origin: &Path) -> Result<Episode> {
    let doc: TranscriptDoc =
        serde_json::from_slice(raw).map_err(|e| json_error(origin, raw, &e))?;
    episode_from_doc(doc, description, origin)
}

pub fn transcript_doc(episode: &Episode) -> TranscriptDoc {
    TranscriptDoc {
        episode_id: episode.episode_id.clone(),
        show_id: episode.show_id.clone(),
        title: episode.title.clone(),
        segments: episode
            .segments
            .iter()
            .map(|s| SegmentDoc {
                words: s
                    .words
                    .iter()
                    .map(|w| WordDoc {
                        w: w.text.clone(),
                        s: Some(w.start_s),
                        e: Some(w.end_s),
                    })
                    .collect(),
            })
            .collect(),
    }
}

pub fn read_transcript(path: &Path, description: Option<&str>) -> Result<Episode> {
    let raw = fs::read(path).map_err(|e| PodsumError::io(path, e))?;
    parse_transcript(&raw, description, path)
}

pub fn write_transcript(path: &Path, episode: &Episode) -> Result<()> {
    let json = serde_json::to_vec(&transcript_doc(episode)).expect("transcript serializes");
    fs::write(path, json).map_err(|e| PodsumError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataLine {
    pub episode_id: String,
    pub description: String,
}

/// Non-blank lines of a JSONL file with their 1-based line numbers.
pub(crate) fn jsonl_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| PodsumError::io(path, e))
}

pub fn read_metadata(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = read_text(path)?;
    let mut out = BTreeMap::new();
    for (line, l) in jsonl_lines(&text) {
        let m: MetadataLine = serde_json::from_str(l).map_err(|e| PodsumError::Record {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        if out.insert(m.episode_id.clone(), m.description).is_some() {
            return Err(PodsumError::Record {
                path: path.to_path_buf(),
                line,
                message: format!("duplicate metadata for episode {}", m.episode_id),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub metadata: Option<PathBuf>,
    pub split: Split,
    pub transcripts: Vec<PathBuf>,
}

#[derive(Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum ManifestLine {
    Header { metadata: PathBuf, split: Split },
    Entry { transcript: PathBuf },
}

/// Reads a manifest. A manifest with no transcript lines may omit the header,
/// and is then an empty training split.
pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut header: Option<(PathBuf, Split)> = None;
    let mut transcripts = Vec::new();
    for (line, l) in jsonl_lines(&text) {
        let record_error = |message: String| PodsumError::Record {
            path: path.to_path_buf(),
            line,
            message,
        };
        let parsed: ManifestLine = serde_json::from_str(l).map_err(|_| {
            record_error(String::from(
                "expected {\"transcript\": path} or {\"metadata\": path, \"split\": \"train\"|\"valid\"|\"test\"}",
            ))
        })?;
        match parsed {
            ManifestLine::Header { metadata, split } => {
                if header.is_some() {
                    return Err(record_error(String::from("second manifest header")));
                }
                header = Some((base.join(metadata), split));
            }
            ManifestLine::Entry { transcript } => transcripts.push(base.join(transcript)),
        }
    }
    match header {
        Some((metadata, split)) => Ok(Manifest {
            metadata: Some(metadata),
            split,
            transcripts,
        }),
        None if transcripts.is_empty() => Ok(Manifest {
            metadata: None,
            split: Split::Train,
            transcripts,
        }),
        None => Err(PodsumError::invalid(format!(
            "{}: manifest has no metadata header",
            path.display()
        ))),
    }
}

/// Loads every listed episode in manifest order. Transcripts are parsed in
/// parallel on the current rayon pool.
pub fn read_corpus(manifest_path: &Path) -> Result<Corpus> {
    let manifest = read_manifest(manifest_path)?;
    let metadata = match &manifest.metadata {
        Some(p) => read_metadata(p)?,
        None => BTreeMap::new(),
    };
    let episodes: Vec<Episode> = manifest
        .transcripts
        .par_iter()
        .map(|p| {
            let raw = fs::read(p).map_err(|e| PodsumError::io(p, e))?;
            let doc: TranscriptDoc =
                serde_json::from_slice(&raw).map_err(|e| json_error(p, &raw, &e))?;
            let description = metadata.get(&doc.episode_id).map(String::as_str);
            if description.is_none() {
                debug!(
                    "{}: no metadata for episode {}",
                    p.display(),
                    doc.episode_id
                );
            }
            episode_from_doc(doc, description, p)
        })
        .collect::<Result<_>>()?;
    let mut seen = HashSet::new();
    for e in &episodes {
        if !seen.insert(e.episode_id.as_str()) {
            return Err(PodsumError::invalid(format!(
                "{}: duplicate episode_id {}",
                manifest_path.display(),
                e.episode_id
            )));
        }
    }
    Ok(Corpus {
        split: manifest.split,
        episodes,
    })
}

fn file_stem_for(index: usize, id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{index:05}_{safe}")
}

/// Writes `dir/transcripts/*.json`, `dir/metadata.jsonl` and
/// `dir/manifest.jsonl`; returns the manifest path.
pub fn write_corpus(dir: &Path, corpus: &Corpus) -> Result<PathBuf> {
    let tdir = dir.join("transcripts");
    fs::create_dir_all(&tdir).map_err(|e| PodsumError::io(&tdir, e))?;
    let mut manifest =
        serde_json::json!({"metadata": "metadata.jsonl", "split": corpus.split}).to_string();
    manifest.push('\n');
    let mut metadata = String::new();
    for (i, e) in corpus.episodes.iter().enumerate() {
        let name = format!("{}.json", file_stem_for(i, &e.episode_id));
        write_transcript(&tdir.join(&name), e)?;
        manifest.push_str(
            &serde_json::json!({"transcript": format!("transcripts/{name}")}).to_string(),
        );
        manifest.push('\n');
        let line = MetadataLine {
            episode_id: e.episode_id.clone(),
            description: e.creator_description.clone(),
        };
        metadata.push_str(&serde_json::to_string(&line).expect("metadata serializes"));
        metadata.push('\n');
    }
    let meta_path = dir.join("metadata.jsonl");
    fs::write(&meta_path, metadata).map_err(|e| PodsumError::io(&meta_path, e))?;
    let manifest_path = dir.join("manifest.jsonl");
    fs::write(&manifest_path, manifest).map_err(|e| PodsumError::io(&manifest_path, e))?;
    Ok(manifest_path)
}
