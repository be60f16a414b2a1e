//! Canonical transcript data model.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// One recognized word with its audio interval in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordToken {
    pub text: String,
    pub start_s: f64,
    pub end_s: f64,
}

impl WordToken {
    pub fn new(text: impl Into<String>, start_s: f64, end_s: f64) -> Self {
        Self {
            text: text.into(),
            start_s,
            end_s,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// An ASR segment, roughly thirty seconds of audio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub words: Vec<WordToken>,
}

impl Segment {
    /// Words joined by single spaces.
    pub fn text(&self) -> String {
        join_words(self.words.iter().map(|w| w.text.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub episode_id: String,
    pub show_id: String,
    pub title: String,
    pub creator_description: String,
    pub segments: Vec<Segment>,
}

impl Episode {
    /// Number of recognized words over all segments.
    pub fn token_count(&self) -> usize {
        self.segments.iter().map(|s| s.words.len()).sum()
    }

    pub fn words(&self) -> impl Iterator<Item = &WordToken> {
        self.segments.iter().flat_map(|s| s.words.iter())
    }

    pub fn transcript_text(&self) -> String {
        join_words(self.words().map(|w| w.text.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub split: Split,
    pub episodes: Vec<Episode>,
}

impl Corpus {
    pub fn episode(&self, id: &str) -> Option<&Episode> {
        self.episodes.iter().find(|e| e.episode_id == id)
    }
}

fn join_words<'a>(words: impl Iterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for w in words {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}
