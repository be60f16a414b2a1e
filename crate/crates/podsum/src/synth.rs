//! Deterministic synthetic corpora for tests, demos and the acceptance suite.
//!
//! Transcripts are pseudo-words with increasing word times. Each creator
//! description copies one or two transcript passages verbatim (so labeling has
//! positives), adds a filler sentence, and usually ends with the hosting
//! platform boilerplate.

use podsum_core::eval::{JudgmentRecord, QUESTION_COUNT};
use podsum_core::{Corpus, Episode, Segment, Split, WordToken};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const ONSETS: [&str; 16] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr",
];
const NUCLEI: [&str; 6] = ["a", "e", "i", "o", "u", "ai"];

const BOILERPLATE: [&str; 3] = [
    "--- Support this podcast: https://anchor.fm/{show}",
    "--- Send in a voice message: https://anchor.fm/{show}/message",
    "--- This episode is sponsored by Anchor: The easiest way to make a podcast. https://anchor.fm/app",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub episodes: usize,
    pub shows: usize,
    pub min_segments: usize,
    pub max_segments: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub vocabulary: usize,
    pub split: Split,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            episodes: 20,
            shows: 5,
            min_segments: 1,
            max_segments: 90,
            min_words: 40,
            max_words: 110,
            vocabulary: 400,
            split: Split::Train,
            seed: 13,
        }
    }
}

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(1..=3);
    (0..syllables)
        .map(|_| {
            format!(
                "{}{}",
                ONSETS.choose(rng).unwrap(),
                NUCLEI.choose(rng).unwrap()
            )
        })
        .collect()
}

fn vocabulary(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut words: Vec<String> = Vec::with_capacity(n);
    while words.len() < n {
        let w = pseudo_word(rng);
        if !words.contains(&w) {
            words.push(w);
        }
    }
    words
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

struct Builder {
    rng: ChaCha8Rng,
    vocab: Vec<String>,
}

impl Builder {
    /// Zipf-like draw: low indices are frequent.
    fn word(&mut self) -> String {
        let u: f64 = self.rng.random();
        let i = ((self.vocab.len() as f64).powf(u) - 1.0) as usize;
        self.vocab[i.min(self.vocab.len() - 1)].clone()
    }

    fn segment(&mut self, index: usize, n_words: usize, clock: &mut f64) -> Segment {
        let mut words = Vec::with_capacity(n_words);
        let mut sentence_start = true;
        for i in 0..n_words {
            let mut text = self.word();
            if sentence_start {
                text = capitalize(&text);
            }
            sentence_start = i + 1 < n_words && self.rng.random_bool(0.08);
            if sentence_start || i + 1 == n_words {
                text.push('.');
            }
            let start = *clock + self.rng.random_range(0.0..0.15);
            let end = start + self.rng.random_range(0.15..0.6);
            *clock = end;
            words.push(WordToken::new(text, round_ms(start), round_ms(end)));
        }
        Segment { index, words }
    }

    fn passage(&mut self, episode: &Episode) -> String {
        let seg = &episode.segments[self.rng.random_range(0..episode.segments.len())];
        let len = self.rng.random_range(6..=14).min(seg.words.len());
        let start = self.rng.random_range(0..=seg.words.len() - len);
        let words: Vec<String> = seg.words[start..start + len]
            .iter()
            .map(|w| w.text.trim_end_matches('.').to_string())
            .collect();
        let mut s = capitalize(&words.join(" "));
        s.push('.');
        s
    }

    fn description(&mut self, episode: &Episode, show: &str) -> String {
        let mut parts = Vec::new();
        for _ in 0..self.rng.random_range(1..=2) {
            parts.push(self.passage(episode));
        }
        let filler: Vec<String> = (0..self.rng.random_range(4..10))
            .map(|_| self.word())
            .collect();
        parts.push(format!("{}!", capitalize(&filler.join(" "))));
        if self.rng.random_bool(0.85) {
            let template = BOILERPLATE.choose(&mut self.rng).unwrap();
            parts.push(template.replace("{show}", show));
        }
        parts.join(" ")
    }
}

fn round_ms(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}

/// A corpus of `config.episodes` episodes, identical for identical configs.
pub fn synth_corpus(config: &SynthConfig) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vocab = vocabulary(&mut rng, config.vocabulary.max(8));
    let mut b = Builder { rng, vocab };
    let episodes = (0..config.episodes)
        .map(|i| {
            let show = format!("show{}", i % config.shows.max(1));
            let n_segments = b
                .rng
                .random_range(config.min_segments.max(1)..=config.max_segments.max(1));
            let mut clock = 0.0;
            let segments = (0..n_segments)
                .map(|s| {
                    let n = b
                        .rng
                        .random_range(config.min_words.max(1)..=config.max_words.max(1));
                    b.segment(s, n, &mut clock)
                })
                .collect();
            let mut episode = Episode {
                episode_id: format!("{}-ep{i:04}", config.split.as_str()),
                show_id: show.clone(),
                title: format!("Episode {i} of {show}"),
                creator_description: String::new(),
                segments,
            };
            episode.creator_description = b.description(&episode, &show);
            episode
        })
        .collect();
    Corpus {
        split: config.split,
        episodes,
    }
}

/// An episode with exactly `segments` segments and `tokens` words, spread as
/// evenly as possible (earlier segments take the remainder).
pub fn sized_episode(id: &str, segments: usize, tokens: usize, seed: u64) -> Episode {
    assert!(
        segments > 0 && tokens >= segments,
        "every segment needs a word"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = vocabulary(&mut rng, 200);
    let mut b = Builder { rng, vocab };
    let mut clock = 0.0;
    let base = tokens / segments;
    let extra = tokens % segments;
    let segments = (0..segments)
        .map(|s| b.segment(s, base + usize::from(s < extra), &mut clock))
        .collect();
    Episode {
        episode_id: id.to_string(),
        show_id: String::from("show"),
        title: String::new(),
        creator_description: String::new(),
        segments,
    }
}

/// Random judgments: every system rates every episode.
pub fn synth_judgments(systems: &[&str], episodes: usize, seed: u64) -> Vec<JudgmentRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(systems.len() * episodes);
    for e in 0..episodes {
        for s in systems {
            let mut answers = [false; QUESTION_COUNT];
            answers.iter_mut().for_each(|a| *a = rng.random_bool(0.6));
            out.push(JudgmentRecord {
                episode_id: format!("test-ep{e:04}"),
                system_id: s.to_string(),
                quality: rng.random_range(0..=3),
                answers,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let c = SynthConfig::default();
        assert_eq!(synth_corpus(&c), synth_corpus(&c));
    }

    #[test]
    fn sized_episode_counts() {
        let e = sized_episode("lead", 80, 5743, 1);
        assert_eq!(e.segments.len(), 80);
        assert_eq!(e.token_count(), 5743);
    }

    #[test]
    fn word_times_increase() {
        let corpus = synth_corpus(&SynthConfig::default());
        for e in &corpus.episodes {
            let times: Vec<f64> = e.words().map(|w| w.start_s).collect();
            assert!(times.windows(2).all(|w| w[0] <= w[1]));
            assert!(e.words().all(|w| w.end_s >= w.start_s));
        }
    }
}
