//! Bag-of-words tokenization: lowercase, strip digits and punctuation,
//! drop stop words and single letters.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Tokens shorter than this are discarded.
pub const MIN_TOKEN_LEN: usize = 2;

const DEFAULT_STOP_WORDS: &str = include_str!("../data/stop_words_en.txt");
const DEFAULT_STOP_WORDS_NAME: &str = "english-318-v1";

/// Ordered lowercase alphabetic tokens of one document. Multiplicity is kept.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWordList {
    words: BTreeSet<String>,
    source_name: String,
}

impl StopWordList {
    /// Parses the stop-word file format: one word per line, `#` comments,
    /// blank lines ignored. Entries are lowercased.
    pub fn parse(text: &str, source_name: impl Into<String>) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopWordList {
            words,
            source_name: source_name.into(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text, path.display().to_string()))
    }

    pub fn from_words<I, S>(words: I, source_name: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopWordList {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
            source_name: source_name.into(),
        }
    }

    pub fn empty() -> Self {
        Self::from_words(std::iter::empty::<&str>(), "none")
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn remove(&mut self, word: &str) -> bool {
        self.words.remove(word)
    }

    /// Content hash of the word set (independent of `source_name`). Stored in
    /// model files so prediction can refuse a different tokenizer setup.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        for w in &self.words {
            h.write(w.as_bytes());
            h.write(b"\n");
        }
        h.finish()
    }
}

/// The embedded 318-word English list.
pub fn default_stop_words() -> StopWordList {
    StopWordList::parse(DEFAULT_STOP_WORDS, DEFAULT_STOP_WORDS_NAME)
}

/// Splits on every codepoint that is not an ASCII letter after lowercasing,
/// so digits and punctuation act as separators ("mp3" becomes "mp").
pub fn tokenize(text: &str, stops: &StopWordList) -> TokenStream {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if current.len() >= MIN_TOKEN_LEN && !stops.contains(current) {
            tokens.push(std::mem::take(current));
        } else {
            current.clear();
        }
    };
    for ch in text.chars() {
        for lc in ch.to_lowercase() {
            if lc.is_ascii_lowercase() {
                current.push(lc);
            } else {
                flush(&mut current, &mut tokens);
            }
        }
    }
    flush(&mut current, &mut tokens);
    TokenStream { tokens }
}

/// FNV-1a, 64 bit. Used only for content fingerprints.
pub(crate) struct Fnv64(u64);

impl Fnv64 {
    pub(crate) fn new() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}
