//! Text preprocessing: normalization, tokenization, stop-word removal and
//! Porter stemming.
//!
//! The pipeline order is normalize -> tokenize -> remove stop words -> stem.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

mod porter;

pub use porter::stem_word;

/// Bundled default stop list, one word per line, `#` lines are comments.
const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Error)]
pub enum StopListError {
    #[error("failed to read stop list {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("stop list {path} line {line}: word {word:?} is not lowercase alphanumeric")]
    BadWord {
        path: String,
        line: usize,
        word: String,
    },
}

/// An ordered list of lowercase, stemmed, stop-word-free tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TermList(Vec<String>);

impl TermList {
    pub fn new(terms: Vec<String>) -> Self {
        TermList(terms)
    }

    pub fn terms(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }
}

impl<'a> IntoIterator for &'a TermList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Lowercase the input and replace every non-alphanumeric character with a
/// space. Digits are preserved.
pub fn normalize(text: &str) -> String {
    text.chars()
        .flat_map(|c| {
            if c.is_alphanumeric() {
                // Some lowercase expansions carry combining marks; keeping
                // only alphanumeric output makes normalize idempotent.
                let lowered: Vec<char> =
                    c.to_lowercase().filter(|lc| lc.is_alphanumeric()).collect();
                // A few letters (mathematical capitals and the like) have
                // no lowercase form; treat them as punctuation.
                if lowered.iter().any(|lc| lc.is_uppercase()) {
                    vec![' ']
                } else {
                    lowered
                }
            } else {
                vec![' ']
            }
        })
        .collect()
}

/// Split a normalized string into maximal runs of alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Stem every token with the Porter algorithm.
pub fn stem(tokens: &[String]) -> Vec<String> {
    tokens.iter().map(|t| stem_word(t)).collect()
}

/// Preprocessing pipeline with a configurable stop list.
#[derive(Debug, Clone)]
pub struct Pipeline {
    stopwords: BTreeSet<String>,
}

impl Default for Pipeline {
    fn default() -> Self {
        Pipeline::new()
    }
}

impl Pipeline {
    /// Pipeline with the bundled default stop list.
    pub fn new() -> Self {
        let stopwords = DEFAULT_STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect();
        Pipeline { stopwords }
    }

    /// Pipeline with an explicit stop list.
    pub fn with_stopwords<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Pipeline {
            stopwords: words.into_iter().map(Into::into).collect(),
        }
    }

    /// Load a stop list from a plain-text file, one word per line.
    pub fn from_stoplist_file(path: &Path) -> Result<Self, StopListError> {
        let text = std::fs::read_to_string(path).map_err(|source| StopListError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut stopwords = BTreeSet::new();
        for (idx, line) in text.lines().enumerate() {
            let word = line.trim();
            if word.is_empty() || word.starts_with('#') {
                continue;
            }
            if !word
                .chars()
                .all(|c| c.is_alphanumeric() && !c.is_uppercase())
            {
                return Err(StopListError::BadWord {
                    path: path.display().to_string(),
                    line: idx + 1,
                    word: word.to_owned(),
                });
            }
            stopwords.insert(word.to_owned());
        }
        Ok(Pipeline { stopwords })
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    /// Order-preserving filter of lowercase tokens against the stop list.
    pub fn remove_stopwords(&self, tokens: Vec<String>) -> Vec<String> {
        tokens
            .into_iter()
            .filter(|t| !self.stopwords.contains(t))
            .collect()
    }

    /// Full pipeline: normalize, tokenize, remove stop words, then stem.
    ///
    /// Stop-word removal runs before stemming, so the stop list is matched
    /// against surface forms. Stemming can reintroduce a stop word (for
    /// example "canned" stems to "can"), so the filter is applied once more
    /// to the stemmed output.
    pub fn preprocess(&self, text: &str) -> TermList {
        let tokens = tokenize(&normalize(text));
        let stemmed = stem(&self.remove_stopwords(tokens));
        TermList(self.remove_stopwords(stemmed))
    }
}
