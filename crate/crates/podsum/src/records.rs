//! Line-delimited pipeline artifacts.
//!
//! Every record is one JSON object per line with an explicit `"kind"` field.
//! Each stage declares the kind it reads, and reading a file holding another
//! kind is a validation error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use podsum_core::backend::SummaryWarning;
use podsum_core::cleanser::CleanPair;
use podsum_core::eval::JudgmentRecord;
use podsum_core::features::{Binner, CandidateSet, SegmentFeatures};
use podsum_core::labeler::SegmentLabel;
use podsum_core::selector::SourceText;
use podsum_core::stats::IdfTable;
use podsum_core::{Episode, Split};
use serde::{Deserialize, Serialize};

use crate::corpus_io::{jsonl_lines, read_text};
use crate::error::{PodsumError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub split: Split,
    #[serde(flatten)]
    pub episode: Episode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub episode_id: String,
    pub summary: String,
    #[serde(default)]
    pub postprocessed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<SummaryWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Episode(EpisodeRecord),
    Idf(IdfTable),
    Candidates(CandidateSet),
    Features(SegmentFeatures),
    Binner(Binner),
    Label(SegmentLabel),
    CleanRef(CleanPair),
    Source(SourceText),
    Summary(SummaryRecord),
    Judgment(JudgmentRecord),
}

impl Record {
    pub fn kind(&self) -> &'static str {
        match self {
            Record::Episode(_) => EpisodeRecord::KIND,
            Record::Idf(_) => IdfTable::KIND,
            Record::Candidates(_) => CandidateSet::KIND,
            Record::Features(_) => SegmentFeatures::KIND,
            Record::Binner(_) => Binner::KIND,
            Record::Label(_) => SegmentLabel::KIND,
            Record::CleanRef(_) => CleanPair::KIND,
            Record::Source(_) => SourceText::KIND,
            Record::Summary(_) => SummaryRecord::KIND,
            Record::Judgment(_) => JudgmentRecord::KIND,
        }
    }
}

/// A payload type carried by exactly one record kind.
pub trait RecordKind: Sized {
    const KIND: &'static str;
    fn into_record(self) -> Record;
    /// The payload, or `None` when the record is of another kind.
    fn from_record(record: Record) -> Option<Self>;
}

macro_rules! record_kind {
    ($ty:ty, $variant:ident, $kind:literal) => {
        impl RecordKind for $ty {
            const KIND: &'static str = $kind;

            fn into_record(self) -> Record {
                Record::$variant(self)
            }

            fn from_record(record: Record) -> Option<Self> {
                match record {
                    Record::$variant(v) => Some(v),
                    _ => None,
                }
            }
        }
    };
}

record_kind!(EpisodeRecord, Episode, "episode");
record_kind!(IdfTable, Idf, "idf");
record_kind!(CandidateSet, Candidates, "candidates");
record_kind!(SegmentFeatures, Features, "features");
record_kind!(Binner, Binner, "binner");
record_kind!(SegmentLabel, Label, "label");
record_kind!(CleanPair, CleanRef, "clean_ref");
record_kind!(SourceText, Source, "source");
record_kind!(SummaryRecord, Summary, "summary");
record_kind!(JudgmentRecord, Judgment, "judgment");

pub fn to_line(record: &Record) -> String {
    serde_json::to_string(record).expect("records serialize")
}

/// Writes one record per line; an empty list gives an empty file.
pub fn write_records(path: &Path, records: &[Record]) -> Result<()> {
    let file = File::create(path).map_err(|e| PodsumError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        writeln!(w, "{}", to_line(r)).map_err(|e| PodsumError::io(path, e))?;
    }
    w.flush().map_err(|e| PodsumError::io(path, e))
}

pub fn parse_records(path: &Path, text: &str) -> Result<Vec<Record>> {
    jsonl_lines(text)
        .map(|(line, l)| {
            serde_json::from_str(l).map_err(|e| PodsumError::Record {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn read_records(path: &Path) -> Result<Vec<Record>> {
    parse_records(path, &read_text(path)?)
}

pub fn write_typed<T: RecordKind>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let records: Vec<Record> = items.into_iter().map(T::into_record).collect();
    write_records(path, &records)
}

/// Reads a file whose records must all be of kind `T::KIND`.
pub fn read_typed<T: RecordKind>(path: &Path) -> Result<Vec<T>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (line, l) in jsonl_lines(&text) {
        let record: Record = serde_json::from_str(l).map_err(|e| PodsumError::Record {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        let found = record.kind();
        match T::from_record(record) {
            Some(v) => out.push(v),
            None => {
                return Err(PodsumError::Record {
                    path: path.to_path_buf(),
                    line,
                    message: format!("expected a \"{}\" record, found \"{}\"", T::KIND, found),
                })
            }
        }
    }
    Ok(out)
}

/// Reads a file holding exactly one record of kind `T::KIND`.
pub fn read_single<T: RecordKind>(path: &Path) -> Result<T> {
    let mut items = read_typed::<T>(path)?;
    match items.len() {
        1 => Ok(items.pop().expect("one item")),
        n => Err(PodsumError::invalid(format!(
            "{}: expected one \"{}\" record, found {n}",
            path.display(),
            T::KIND
        ))),
    }
}
