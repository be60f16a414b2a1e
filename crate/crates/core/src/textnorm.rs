//! Tokenization, sentence splitting and placeholder normalization.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

/// Tokens longer than this (in characters) collapse to `<long>`.
pub const MAX_TOKEN_CHARS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Word,
    Url,
    Email,
    Mention,
    Hashtag,
    Digits,
    Overlong,
}

impl TokenKind {
    pub fn placeholder(self) -> Option<&'static str> {
        match self {
            TokenKind::Word => None,
            TokenKind::Url => Some("<url>"),
            TokenKind::Email => Some("<email>"),
            TokenKind::Mention => Some("<user>"),
            TokenKind::Hashtag => Some("<hashtag>"),
            TokenKind::Digits => Some("<digits>"),
            TokenKind::Overlong => Some("<long>"),
        }
    }

    fn from_placeholder(s: &str) -> Option<Self> {
        PLACEHOLDER_KINDS
            .iter()
            .copied()
            .find(|k| k.placeholder() == Some(s))
    }
}

const PLACEHOLDER_KINDS: [TokenKind; 6] = [
    TokenKind::Url,
    TokenKind::Email,
    TokenKind::Mention,
    TokenKind::Hashtag,
    TokenKind::Digits,
    TokenKind::Overlong,
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormToken {
    pub surface: String,
    pub kind: TokenKind,
}

impl NormToken {
    pub fn word(surface: impl Into<String>) -> Self {
        Self {
            surface: surface.into(),
            kind: TokenKind::Word,
        }
    }

    fn placeholder(kind: TokenKind) -> Self {
        Self {
            surface: kind.placeholder().unwrap_or_default().to_string(),
            kind,
        }
    }

    pub fn is_placeholder(&self) -> bool {
        self.kind != TokenKind::Word
    }
}

fn trim_punct(s: &str) -> &str {
    s.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Trims punctuation but keeps a leading `@` or `#`.
fn trim_keep_sigil(s: &str) -> &str {
    s.trim_start_matches(|c: char| !c.is_alphanumeric() && c != '@' && c != '#')
        .trim_end_matches(|c: char| !c.is_alphanumeric())
}

/// Whether a whitespace token is a URL (scheme, `www.` prefix, or `host.tld/path`).
pub fn is_url(token: &str) -> bool {
    let t = token.trim_matches(|c: char| {
        matches!(
            c,
            '(' | ')' | '[' | ']' | '<' | '>' | '"' | '\'' | ',' | ';'
        )
    });
    let lower = t.to_ascii_lowercase();
    if lower.contains("://") || lower.starts_with("www.") {
        return true;
    }
    // host.tld/path without a scheme
    match lower.split_once('/') {
        Some((host, _)) if !host.contains('@') => match host.rsplit_once('.') {
            Some((name, tld)) => {
                !name.is_empty()
                    && name.chars().any(|c| c.is_ascii_alphabetic())
                    && tld.len() >= 2
                    && tld.chars().all(|c| c.is_ascii_alphabetic())
            }
            None => false,
        },
        _ => false,
    }
}

fn is_email(core: &str) -> bool {
    let Some((local, domain)) = core.split_once('@') else {
        return false;
    };
    if local.is_empty() || domain.contains('@') {
        return false;
    }
    match domain.rsplit_once('.') {
        Some((host, tld)) => {
            !host.is_empty() && !tld.is_empty() && tld.chars().all(char::is_alphanumeric)
        }
        None => false,
    }
}

fn is_sigil_name(core: &str, sigil: char) -> bool {
    match core.strip_prefix(sigil) {
        Some(rest) => {
            !rest.is_empty()
                && rest
                    .chars()
                    .all(|c| c.is_alphanumeric() || c == '_' || c == '.')
        }
        None => false,
    }
}

fn is_digits(core: &str) -> bool {
    !core.is_empty()
        && core.chars().any(|c| c.is_ascii_digit())
        && core
            .chars()
            .all(|c| c.is_ascii_digit() || !c.is_alphanumeric())
}

fn classify(raw: &str) -> Option<NormToken> {
    if let Some(kind) = TokenKind::from_placeholder(raw) {
        return Some(NormToken::placeholder(kind));
    }
    if is_url(raw) {
        return Some(NormToken::placeholder(TokenKind::Url));
    }
    let core = trim_keep_sigil(raw);
    if is_email(core) {
        return Some(NormToken::placeholder(TokenKind::Email));
    }
    if is_sigil_name(core, '@') {
        return Some(NormToken::placeholder(TokenKind::Mention));
    }
    if is_sigil_name(core, '#') {
        return Some(NormToken::placeholder(TokenKind::Hashtag));
    }
    let stripped = trim_punct(raw);
    if is_digits(stripped) {
        return Some(NormToken::placeholder(TokenKind::Digits));
    }
    if stripped.chars().count() > MAX_TOKEN_CHARS {
        return Some(NormToken::placeholder(TokenKind::Overlong));
    }
    if stripped.is_empty() {
        return None;
    }
    Some(NormToken::word(stripped.to_lowercase()))
}

/// Whitespace tokenization with placeholder substitution.
///
/// Classes are tried in order url, email, mention, hashtag, digits, overlong;
/// anything else becomes a lowercased word with surrounding punctuation
/// stripped. Pure-punctuation tokens are dropped.
pub fn normalize_tokens(text: &str) -> Vec<NormToken> {
    text.split_whitespace().filter_map(classify).collect()
}

/// Normalizes a single word, as used for per-word corpus statistics.
pub fn normalize_word(word: &str) -> Option<NormToken> {
    classify(word)
}

/// Whether a token closes a sentence: it ends in `.`, `!` or `?`, possibly
/// followed by closing quotes or brackets.
pub fn ends_sentence(token: &str) -> bool {
    let t = token.trim_end_matches(['"', '\'', ')', ']', '\u{201d}', '\u{2019}']);
    t.ends_with(['.', '!', '?'])
}

fn starts_sentence(token: &str) -> bool {
    match token.chars().find(|c| c.is_alphanumeric()) {
        Some(c) => c.is_uppercase(),
        None => true,
    }
}

fn word_spans(text: &str) -> Vec<Range<usize>> {
    WhitespaceTokenizer.spans(text)
}

/// Byte ranges of the sentences of `text`, each from its first to its last
/// whitespace token.
///
/// A boundary falls after a token ending in `.`, `!` or `?` when the next token
/// starts with an uppercase letter or carries no letters or digits at all, or
/// when the text ends. A token beginning with `---` always opens a new
/// sentence. Boundaries only fall between whitespace tokens, so a URL is never
/// split.
pub fn sentence_spans(text: &str) -> Vec<Range<usize>> {
    let words = word_spans(text);
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for (i, span) in words.iter().enumerate() {
        let tok = &text[span.clone()];
        if tok.starts_with("---") {
            if let Some(s) = open.take() {
                out.push(s..words[i - 1].end);
            }
        }
        let start = *open.get_or_insert(span.start);
        let boundary = match words.get(i + 1) {
            None => true,
            Some(next) => ends_sentence(tok) && starts_sentence(&text[next.clone()]),
        };
        if boundary {
            out.push(start..span.end);
            open = None;
        }
    }
    out
}

/// Splits text into sentences (see [`sentence_spans`]), each with its
/// internal whitespace collapsed to single spaces.
pub fn split_sentences(text: &str) -> Vec<String> {
    sentence_spans(text)
        .into_iter()
        .map(|r| text[r].split_whitespace().collect::<Vec<_>>().join(" "))
        .collect()
}

/// Whitespace tokenization with punctuation left attached.
pub fn tokenize_words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Lowercased whitespace tokens, the unit for ROUGE and labeling.
pub fn lowercase_tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(|t| t.to_lowercase()).collect()
}

/// Budget tokenizer hook.
///
/// Token budgets and length limits are counted with an implementation of this
/// trait. The default is [`WhitespaceTokenizer`]; a subword tokenizer can be
/// plugged in by reporting the byte span of each token.
pub trait Tokenizer {
    /// Byte ranges of the tokens of `text`, in order and non-overlapping.
    fn spans(&self, text: &str) -> Vec<Range<usize>>;

    fn count(&self, text: &str) -> usize {
        self.spans(text).len()
    }

    /// Longest prefix of `text` holding at most `max_tokens` tokens, cut at a
    /// token boundary.
    fn truncate<'a>(&self, text: &'a str, max_tokens: usize) -> &'a str {
        let spans = self.spans(text);
        if spans.len() <= max_tokens {
            return text.trim_end();
        }
        match max_tokens {
            0 => "",
            n => &text[..spans[n - 1].end],
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn spans(&self, text: &str) -> Vec<Range<usize>> {
        let mut spans = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices() {
            match (c.is_whitespace(), start) {
                (true, Some(s)) => {
                    spans.push(s..i);
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        if let Some(s) = start {
            spans.push(s..text.len());
        }
        spans
    }

    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn kinds(tokens: &[NormToken]) -> Vec<(TokenKind, &str)> {
        tokens
            .iter()
            .map(|t| (t.kind, t.surface.as_str()))
            .collect()
    }

    #[test]
    fn url_replaced() {
        let toks = normalize_tokens("Visit https://anchor.fm/show now");
        assert_eq!(
            kinds(&toks),
            vec![
                (TokenKind::Word, "visit"),
                (TokenKind::Url, "<url>"),
                (TokenKind::Word, "now")
            ]
        );
    }

    #[test]
    fn overlong_boundary() {
        let toks = normalize_tokens("a 26-character token aaaaaaaaaaaaaaaaaaaaaaaaaa");
        assert_eq!(toks.last().unwrap().kind, TokenKind::Overlong);
        assert_eq!(toks.last().unwrap().surface, "<long>");
        // exactly 25 stays a word
        let toks = normalize_tokens("aaaaaaaaaaaaaaaaaaaaaaaaa");
        assert_eq!(toks[0].kind, TokenKind::Word);
        assert_eq!(toks[0].surface.len(), 25);
        // mixed alphanumerics stay words
        assert_eq!(
            toks_of("26-character"),
            vec![(TokenKind::Word, "26-character".into())]
        );
    }

    fn toks_of(s: &str) -> Vec<(TokenKind, String)> {
        normalize_tokens(s)
            .into_iter()
            .map(|t| (t.kind, t.surface))
            .collect()
    }

    #[test]
    fn priority_order_hand_trace() {
        let toks = normalize_tokens("Email me@x.co or @handle #nfl 2019");
        assert_eq!(
            kinds(&toks),
            vec![
                (TokenKind::Word, "email"),
                (TokenKind::Email, "<email>"),
                (TokenKind::Word, "or"),
                (TokenKind::Mention, "<user>"),
                (TokenKind::Hashtag, "<hashtag>"),
                (TokenKind::Digits, "<digits>"),
            ]
        );
    }

    #[test]
    fn digits_with_punctuation() {
        assert_eq!(toks_of("1:18")[0].0, TokenKind::Digits);
        assert_eq!(toks_of("$5.99,")[0].0, TokenKind::Digits);
        assert_eq!(toks_of("mp3")[0].0, TokenKind::Word);
    }

    #[test]
    fn bare_domain_is_url() {
        assert!(is_url("anchor.fm/triplethreat"));
        assert!(is_url("www.example.com"));
        assert!(!is_url("and/or"));
        assert!(!is_url("1/2"));
        assert!(!is_url("me@x.co"));
    }

    #[test]
    fn punctuation_only_dropped() {
        assert_eq!(
            toks_of("--- Support!"),
            vec![(TokenKind::Word, "support".into())]
        );
        assert!(normalize_tokens("").is_empty());
    }

    #[test]
    fn placeholders_are_fixed_points() {
        let once = normalize_tokens(
            "see https://x.y/z, @bob #tag 42 me@a.io and aaaaaaaaaaaaaaaaaaaaaaaaaaaaaa",
        );
        let joined: Vec<&str> = once.iter().map(|t| t.surface.as_str()).collect();
        let twice = normalize_tokens(&joined.join(" "));
        assert_eq!(once, twice);
    }

    #[test]
    fn sentences_basic() {
        assert_eq!(split_sentences("Hi. Bye."), vec!["Hi.", "Bye."]);
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn no_split_inside_url() {
        assert_eq!(
            split_sentences("See https://a.b/c.d now"),
            vec!["See https://a.b/c.d now"]
        );
    }

    #[test]
    fn description_split_after_exclamation() {
        let s = split_sentences(
            "The Guys are back for another Triple Threat Sports Podcast! This time UTXJGTHEDON is giving out all the smoke",
        );
        assert_eq!(s.len(), 2);
        assert!(s[0].ends_with("Podcast!"));
        assert!(s[1].starts_with("This time"));
    }

    #[test]
    fn dash_rule_opens_sentence() {
        let s = split_sentences("Great show --- Support this podcast: https://anchor.fm/x");
        assert_eq!(
            s,
            vec![
                "Great show",
                "--- Support this podcast: https://anchor.fm/x"
            ]
        );
    }

    #[test]
    fn lowercase_after_period_no_split() {
        assert_eq!(
            split_sentences("e.g. this one. Next"),
            vec!["e.g. this one.", "Next"]
        );
    }

    #[test]
    fn tokenize_words_examples() {
        assert_eq!(tokenize_words("a b  c"), vec!["a", "b", "c"]);
        assert!(tokenize_words("").is_empty());
        assert_eq!(tokenize_words("don't stop."), vec!["don't", "stop."]);
    }

    #[test]
    fn whitespace_tokenizer_truncate() {
        let t = WhitespaceTokenizer;
        assert_eq!(t.truncate("a  bb ccc dd", 2), "a  bb");
        assert_eq!(t.truncate("a b", 5), "a b");
        assert_eq!(t.truncate("a b", 0), "");
        assert_eq!(t.count(" x y "), 2);
        assert_eq!(t.spans("é b"), vec![0..2, 3..4]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn text() -> impl Strategy<Value = String> {
            proptest::collection::vec(
                prop_oneof![
                    "[A-Za-z]{1,8}[.!?,]?",
                    "https://[a-z]{1,5}\\.[a-z]{2}/[a-z.]{0,6}",
                    "@[a-z]{1,6}",
                    "#[a-z]{1,6}",
                    "[0-9]{1,4}",
                    "[a-z]{26,30}",
                    "---",
                    "[a-z]{1,3}@[a-z]{1,3}\\.com",
                ],
                0..30,
            )
            .prop_map(|v| v.join(" "))
        }

        proptest! {
            #[test]
            fn normalize_idempotent_on_output(s in text()) {
                let once = normalize_tokens(&s);
                let joined: Vec<&str> = once.iter().map(|t| t.surface.as_str()).collect();
                prop_assert_eq!(normalize_tokens(&joined.join(" ")), once);
            }

            #[test]
            fn sentences_lose_nothing(s in "[ a-zA-Z.!?\\-:/]{0,80}") {
                let sentences = split_sentences(&s);
                let normalized: Vec<&str> = s.split_whitespace().collect();
                prop_assert_eq!(sentences.join(" "), normalized.join(" "));
            }

            #[test]
            fn token_count_bound(s in "[ a-z\\t\\n]{0,60}") {
                let runs = s.split(|c: char| !c.is_whitespace()).filter(|r| !r.is_empty()).count();
                prop_assert!(tokenize_words(&s).len() <= runs + 1);
            }
        }
    }
}
