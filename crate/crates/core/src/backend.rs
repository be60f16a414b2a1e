//! The summarizer boundary: decode configuration, wire-protocol message
//! types, and an extractive fallback summarizer.
//!
//! Beam search, the length penalty and n-gram blocking run inside the model
//! server. This side owns their configuration and checks the outputs.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::{sentence_spans, Tokenizer};

pub const PROTO_HEADER: &str = "X-Podsum-Proto";
pub const PROTO_VERSION: &str = "1";
pub const SUMMARIZE_PATH: &str = "/v1/summarize";
pub const EMBED_PATH: &str = "/v1/embed";

/// Decoding parameters; field names are the wire names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub length_penalty: f64,
    /// 0 disables n-gram blocking.
    pub no_repeat_ngram_size: usize,
    pub min_length: usize,
    pub max_length: usize,
    pub num_beams: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            length_penalty: 2.0,
            no_repeat_ngram_size: 3,
            min_length: 39,
            max_length: 250,
            num_beams: 4,
        }
    }
}

impl DecodeConfig {
    /// The lead-truncation run's setting (shorter minimum length).
    pub fn run1() -> Self {
        Self {
            min_length: 35,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_length > self.max_length {
            return Err(Error::InvalidArgument(alloc::format!(
                "min_length {} exceeds max_length {}",
                self.min_length,
                self.max_length
            )));
        }
        if self.num_beams < 1 {
            return Err(Error::InvalidArgument(String::from(
                "num_beams must be >= 1",
            )));
        }
        if !self.length_penalty.is_finite() {
            return Err(Error::InvalidArgument(String::from(
                "length_penalty must be finite",
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarizeRequest {
    pub source: String,
    pub config: DecodeConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummarizeResponse {
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub texts: Vec<String>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: String,
}

/// True iff no whitespace-token n-gram occurs twice. `n = 0` disables the check.
pub fn validate_no_repeat(summary: &str, n: usize) -> bool {
    if n == 0 {
        return true;
    }
    let tokens: Vec<&str> = summary.split_whitespace().collect();
    let mut seen = BTreeSet::new();
    tokens.windows(n).all(|w| seen.insert(w))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum SummaryWarning {
    UnderLength { tokens: usize, min_length: usize },
    Truncated { tokens: usize, max_length: usize },
    RepeatedNgram { n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub text: String,
    pub token_count: usize,
    pub warnings: Vec<SummaryWarning>,
}

/// A text generator behind the decode contract.
pub trait Summarizer {
    type Error: From<Error>;

    fn generate(
        &self,
        source: &str,
        config: &DecodeConfig,
    ) -> core::result::Result<String, Self::Error>;
}

/// Runs a summarizer and enforces the length contract: output longer than
/// `max_length` tokens is truncated, shorter than `min_length` is flagged,
/// and repeated n-grams are flagged but left in place.
pub fn summarize<S: Summarizer + ?Sized>(
    summarizer: &S,
    source: &str,
    config: &DecodeConfig,
    tokenizer: &dyn Tokenizer,
) -> core::result::Result<Summary, S::Error> {
    config.validate()?;
    if source.trim().is_empty() {
        return Err(Error::EmptyInput("source text").into());
    }
    let raw = summarizer.generate(source, config)?;
    let mut warnings = Vec::new();
    let count = tokenizer.count(&raw);
    let text = if count > config.max_length {
        warnings.push(SummaryWarning::Truncated {
            tokens: count,
            max_length: config.max_length,
        });
        String::from(tokenizer.truncate(&raw, config.max_length))
    } else {
        raw
    };
    let token_count = tokenizer.count(&text);
    if token_count < config.min_length {
        warnings.push(SummaryWarning::UnderLength {
            tokens: token_count,
            min_length: config.min_length,
        });
    }
    if !validate_no_repeat(&text, config.no_repeat_ngram_size) {
        warnings.push(SummaryWarning::RepeatedNgram {
            n: config.no_repeat_ngram_size,
        });
    }
    Ok(Summary {
        text,
        token_count,
        warnings,
    })
}

/// Model-free fallback: a prefix of the source.
///
/// Takes at most `max_length` tokens and cuts at the last sentence end that
/// leaves at least `min_length` tokens; with no such sentence end the cut is
/// at `max_length`. A source shorter than `min_length` is returned whole.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExtractiveSummarizer<T> {
    pub tokenizer: T,
}

impl<T: Tokenizer> ExtractiveSummarizer<T> {
    pub fn new(tokenizer: T) -> Self {
        Self { tokenizer }
    }

    pub fn extract<'a>(&self, source: &'a str, config: &DecodeConfig) -> &'a str {
        let spans = self.tokenizer.spans(source);
        if spans.len() < config.min_length {
            return source.trim();
        }
        // tokens fully inside the first `end` bytes
        let tokens_before = |end: usize| spans.partition_point(|s| s.end <= end);
        let best = sentence_spans(source)
            .into_iter()
            .map(|r| r.end)
            .rfind(|&end| (config.min_length..=config.max_length).contains(&tokens_before(end)));
        match best {
            Some(end) => source[..end].trim_start(),
            None => self
                .tokenizer
                .truncate(source, config.max_length)
                .trim_start(),
        }
    }
}

impl<T: Tokenizer> Summarizer for ExtractiveSummarizer<T> {
    type Error = Error;

    fn generate(&self, source: &str, config: &DecodeConfig) -> Result<String> {
        Ok(String::from(self.extract(source, config)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textnorm::WhitespaceTokenizer;
    use alloc::format;
    use alloc::vec;

    fn words(n: usize, period_at: &[usize]) -> String {
        (1..=n)
            .map(|i| {
                if period_at.contains(&i) {
                    format!("W{i}.")
                } else {
                    format!("W{i}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn defaults() {
        let c = DecodeConfig::default();
        assert_eq!(
            (
                c.length_penalty,
                c.no_repeat_ngram_size,
                c.min_length,
                c.max_length,
                c.num_beams
            ),
            (2.0, 3, 39, 250, 4)
        );
        assert_eq!(DecodeConfig::run1().min_length, 35);
        c.validate().unwrap();
    }

    #[test]
    fn invalid_configs() {
        let c = DecodeConfig {
            min_length: 300,
            ..DecodeConfig::default()
        };
        assert!(c.validate().is_err());
        let c = DecodeConfig {
            num_beams: 0,
            ..DecodeConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn cut_at_last_boundary_below_max() {
        let src = words(300, &[100, 240, 280]);
        let s = summarize(
            &ExtractiveSummarizer::new(WhitespaceTokenizer),
            &src,
            &DecodeConfig::default(),
            &WhitespaceTokenizer,
        )
        .unwrap();
        assert_eq!(s.token_count, 240);
        assert!(s.text.ends_with("W240."));
        assert!(s.warnings.is_empty());
        assert!(src.starts_with(&s.text));
    }

    #[test]
    fn hard_cut_without_boundary() {
        let src = words(300, &[10]);
        let s = summarize(
            &ExtractiveSummarizer::new(WhitespaceTokenizer),
            &src,
            &DecodeConfig::default(),
            &WhitespaceTokenizer,
        )
        .unwrap();
        assert_eq!(s.token_count, 250);
    }

    #[test]
    fn short_source_whole_with_warning() {
        let src = words(30, &[]);
        let s = summarize(
            &ExtractiveSummarizer::new(WhitespaceTokenizer),
            &src,
            &DecodeConfig::default(),
            &WhitespaceTokenizer,
        )
        .unwrap();
        assert_eq!(s.text, src);
        assert_eq!(
            s.warnings,
            vec![SummaryWarning::UnderLength {
                tokens: 30,
                min_length: 39
            }]
        );
    }

    #[test]
    fn empty_source_rejected() {
        let r = summarize(
            &ExtractiveSummarizer::new(WhitespaceTokenizer),
            "  ",
            &DecodeConfig::default(),
            &WhitespaceTokenizer,
        );
        assert!(r.is_err());
    }

    struct Fixed(String);

    impl Summarizer for Fixed {
        type Error = Error;
        fn generate(&self, _: &str, _: &DecodeConfig) -> Result<String> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn overlong_service_output_truncated() {
        let s = summarize(
            &Fixed(words(260, &[])),
            "src",
            &DecodeConfig::default(),
            &WhitespaceTokenizer,
        )
        .unwrap();
        assert_eq!(s.token_count, 250);
        assert_eq!(
            s.warnings,
            vec![SummaryWarning::Truncated {
                tokens: 260,
                max_length: 250
            }]
        );
    }

    #[test]
    fn no_repeat_examples() {
        assert!(!validate_no_repeat("a b c a b c", 3));
        assert!(validate_no_repeat("a b c", 3));
        assert!(validate_no_repeat("a b c d a b", 3));
        assert!(validate_no_repeat("a a", 0));
    }

    #[test]
    fn request_wire_names() {
        let req = SummarizeRequest {
            source: String::from("x"),
            config: DecodeConfig::default(),
        };
        let v: serde_json::Value = serde_json::to_value(&req).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"source": "x", "config": {"length_penalty": 2.0, "no_repeat_ngram_size": 3, "min_length": 39, "max_length": 250, "num_beams": 4}})
        );
    }
}
