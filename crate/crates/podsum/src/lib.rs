//! Podcast summarization pipeline: transcript ingestion, JSONL artifacts,
//! the model-server client, reports and the `podsum` command line.
//!
//! The algorithms live in [`podsum_core`]; this crate adds file formats, HTTP
//! and process plumbing.

pub mod cli;
pub mod corpus_io;
pub mod error;
pub mod pipeline;
pub mod records;
pub mod report;
pub mod service;
pub mod synth;

pub use error::{PodsumError, Result};
pub use podsum_core as core;
