//! Algorithmic core of the podcast summarization toolkit.
//!
//! Everything here is pure computation over in-memory data: transcript
//! normalization, ROUGE scoring, corpus IDF statistics, candidate segment
//! features, salience labeling, the segment selector network, reference
//! cleansing, decode configuration, summary postprocessing and evaluation
//! aggregation. File formats, HTTP and the command line live in the `podsum`
//! crate.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod backend;
pub mod cleanser;
pub mod error;
pub mod eval;
pub mod features;
pub mod hash;
pub mod labeler;
pub mod model;
pub mod postprocess;
pub mod rouge;
pub mod selector;
pub mod stats;
pub mod textnorm;

pub use error::{Error, Result};
pub use model::{Corpus, Episode, Segment, Split, WordToken};
