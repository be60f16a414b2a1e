//! Document frequencies, IDF and TF-IDF over a corpus of episodes.
//!
//! A document is one episode, viewed either through its creator description
//! or through its full transcript. Counts are taken over
//! [`normalize_tokens`](crate::textnorm::normalize_tokens) output, so every
//! URL contributes to the single `<url>` entry and so on.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Episode;
use crate::textnorm::{normalize_tokens, normalize_word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocView {
    Descriptions,
    Transcripts,
}

impl DocView {
    fn text_of(self, episode: &Episode) -> String {
        match self {
            DocView::Descriptions => episode.creator_description.clone(),
            DocView::Transcripts => episode.transcript_text(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    pub n_docs: u64,
    pub doc_view: DocView,
    pub df: BTreeMap<String, u64>,
    pub corpus_freq: BTreeMap<String, u64>,
}

impl IdfTable {
    /// `ln(n_docs / df)`; an unseen word is treated as `df = 1`.
    pub fn idf(&self, word: &str) -> f64 {
        let df = self.df.get(word).copied().unwrap_or(1).max(1);
        libm::log(self.n_docs as f64 / df as f64)
    }

    pub fn frequency(&self, word: &str) -> u64 {
        self.corpus_freq.get(word).copied().unwrap_or(0)
    }

    /// Builds a table from raw document texts.
    pub fn from_documents<'a>(
        docs: impl IntoIterator<Item = &'a str>,
        doc_view: DocView,
    ) -> Result<Self> {
        let mut table = IdfTable {
            n_docs: 0,
            doc_view,
            df: BTreeMap::new(),
            corpus_freq: BTreeMap::new(),
        };
        for doc in docs {
            table.add_document(doc);
        }
        if table.n_docs == 0 {
            return Err(Error::EmptyInput("corpus"));
        }
        Ok(table)
    }

    fn add_document(&mut self, text: &str) {
        self.n_docs += 1;
        let mut seen = BTreeSet::new();
        for tok in normalize_tokens(text) {
            *self.corpus_freq.entry(tok.surface.clone()).or_insert(0) += 1;
            seen.insert(tok.surface);
        }
        for w in seen {
            *self.df.entry(w).or_insert(0) += 1;
        }
    }

    /// Merges a table built over a disjoint set of documents.
    pub fn merge(&mut self, other: IdfTable) {
        self.n_docs += other.n_docs;
        for (w, c) in other.df {
            *self.df.entry(w).or_insert(0) += c;
        }
        for (w, c) in other.corpus_freq {
            *self.corpus_freq.entry(w).or_insert(0) += c;
        }
    }
}

/// One document per episode under the chosen view.
pub fn build_idf(episodes: &[Episode], doc_view: DocView) -> Result<IdfTable> {
    let texts: alloc::vec::Vec<String> = episodes.iter().map(|e| doc_view.text_of(e)).collect();
    IdfTable::from_documents(texts.iter().map(String::as_str), doc_view)
}

/// Normalized term frequencies over an episode's whole transcript.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermCounts(BTreeMap<String, u64>);

impl TermCounts {
    pub fn from_episode(episode: &Episode) -> Self {
        let mut counts = BTreeMap::new();
        for w in episode.words() {
            if let Some(tok) = normalize_word(&w.text) {
                *counts.entry(tok.surface).or_insert(0) += 1;
            }
        }
        TermCounts(counts)
    }

    pub fn get(&self, word: &str) -> u64 {
        self.0.get(word).copied().unwrap_or(0)
    }

    pub fn tfidf(&self, word: &str, table: &IdfTable) -> f64 {
        match self.get(word) {
            0 => 0.0,
            tf => tf as f64 * table.idf(word),
        }
    }
}

/// `tf * idf` where `tf` counts the (normalized) word over the episode transcript.
pub fn tfidf(word: &str, episode: &Episode, table: &IdfTable) -> f64 {
    TermCounts::from_episode(episode).tfidf(word, table)
}
