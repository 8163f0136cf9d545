//! Food-item corpus: loading, validation, synthetic generation and
//! train/test splitting, plus per-user relevance judgments.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod synth;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {detail}")]
    Format {
        path: String,
        line: u64,
        detail: String,
    },
    #[error("duplicate item ids: {}", .0.join(", "))]
    DuplicateIds(Vec<String>),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("item id must not be empty")]
    EmptyId,
    #[error("train fraction {0} must lie strictly between 0 and 1")]
    BadTrainFraction(f64),
    #[error("user {user}: items rated both relevant and non-relevant: {}", .items.join(", "))]
    RatingOverlap { user: String, items: Vec<String> },
    #[error("user {user}: ratings reference unknown item ids: {}", .items.join(", "))]
    UnknownRatedItems { user: String, items: Vec<String> },
    #[error("duplicate user id in ratings: {0}")]
    DuplicateUser(String),
}

/// One corpus entry. `concepts` is filled by ontology annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoodItem {
    pub id: String,
    pub group: String,
    pub name: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub tags: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub concepts: BTreeSet<String>,
}

impl FoodItem {
    /// The text used for term extraction and concept annotation.
    pub fn text(&self) -> String {
        format!("{} {}", self.name, self.description)
    }
}

/// An ordered, duplicate-free collection of food items.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Corpus {
    items: Vec<FoodItem>,
}

impl Corpus {
    /// Build a corpus, rejecting empty and duplicate ids. Tags are
    /// normalized to lowercase.
    pub fn new(mut items: Vec<FoodItem>) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        let mut dups = BTreeSet::new();
        for item in &mut items {
            if item.id.is_empty() {
                return Err(CorpusError::EmptyId);
            }
            if !seen.insert(item.id.clone()) {
                dups.insert(item.id.clone());
            }
            item.tags = item
                .tags
                .iter()
                .map(|t| t.trim().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect();
        }
        if !dups.is_empty() {
            return Err(CorpusError::DuplicateIds(dups.into_iter().collect()));
        }
        Ok(Corpus { items })
    }

    pub fn items(&self) -> &[FoodItem] {
        &self.items
    }

    pub fn items_mut(&mut self) -> &mut [FoodItem] {
        &mut self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&FoodItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn ids(&self) -> BTreeSet<String> {
        self.items.iter().map(|i| i.id.clone()).collect()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FoodItem> {
        self.items.iter()
    }

    /// Subset of items whose ids appear in `ids`, preserving corpus order.
    pub fn subset(&self, ids: &BTreeSet<String>) -> Corpus {
        Corpus {
            items: self
                .items
                .iter()
                .filter(|i| ids.contains(&i.id))
                .cloned()
                .collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a FoodItem;
    type IntoIter = std::slice::Iter<'a, FoodItem>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

/// Relevance judgments for one user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingSet {
    pub user_id: String,
    #[serde(default)]
    pub relevant: BTreeSet<String>,
    #[serde(default)]
    pub non_relevant: BTreeSet<String>,
}

impl RatingSet {
    /// Relevant and non-relevant sets must be disjoint.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let overlap: Vec<String> = self
            .relevant
            .intersection(&self.non_relevant)
            .cloned()
            .collect();
        if overlap.is_empty() {
            Ok(())
        } else {
            Err(CorpusError::RatingOverlap {
                user: self.user_id.clone(),
                items: overlap,
            })
        }
    }

    /// Every rated id must exist in the corpus.
    pub fn validate_against(&self, corpus: &Corpus) -> Result<(), CorpusError> {
        self.validate()?;
        let ids = corpus.ids();
        let unknown: Vec<String> = self
            .relevant
            .union(&self.non_relevant)
            .filter(|id| !ids.contains(*id))
            .cloned()
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CorpusError::UnknownRatedItems {
                user: self.user_id.clone(),
                items: unknown,
            })
        }
    }
}

/// Seeded train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    /// Shuffle and cut within each food group instead of globally.
    pub stratify_by_group: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.6,
            seed: 0,
            stratify_by_group: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Csv,
    Json,
}

const CSV_HEADER: [&str; 5] = ["id", "group", "name", "description", "tags"];

/// Load a corpus from a CSV or JSON file. Empty corpora are rejected here;
/// duplicate ids are reported with the offending ids listed.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let corpus = match format {
        CorpusFormat::Csv => load_corpus_csv(path)?,
        CorpusFormat::Json => {
            let text = read_file(path)?;
            let items: Vec<FoodItem> =
                serde_json::from_str(&text).map_err(|e| CorpusError::Format {
                    path: path.display().to_string(),
                    line: e.line() as u64,
                    detail: e.to_string(),
                })?;
            Corpus::new(items)?
        }
    };
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(corpus)
}

fn read_file(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_corpus_csv(path: &Path) -> Result<Corpus, CorpusError> {
    let text = read_file(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let format_err = |line: u64, detail: String| CorpusError::Format {
        path: path.display().to_string(),
        line,
        detail,
    };

    if text.trim().is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }

    let headers = reader
        .headers()
        .map_err(|e| format_err(1, e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut required = BTreeMap::new();
    for name in &CSV_HEADER[..4] {
        match column(name) {
            Some(idx) => {
                required.insert(*name, idx);
            }
            None => return Err(format_err(1, format!("missing required column {name:?}"))),
        }
    }
    let tags_col = column("tags");

    let mut items = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            format_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        let field = |name: &str| -> Result<String, CorpusError> {
            record
                .get(required[name])
                .map(str::to_owned)
                .ok_or_else(|| format_err(line, format!("missing value for column {name:?}")))
        };
        let tags = match tags_col.and_then(|idx| record.get(idx)) {
            Some(raw) => raw
                .split('|')
                .map(|t| t.trim().to_lowercase())
                .filter(|t| !t.is_empty())
                .collect(),
            None => BTreeSet::new(),
        };
        let id = field("id")?;
        if id.is_empty() {
            return Err(format_err(line, "empty id".to_owned()));
        }
        items.push(FoodItem {
            id,
            group: field("group")?,
            name: field("name")?,
            description: field("description")?,
            tags,
            concepts: BTreeSet::new(),
        });
    }
    Corpus::new(items)
}

/// Write a corpus as CSV with the canonical header. Concept annotations do
/// not fit the CSV schema and are dropped; use JSON to keep them.
pub fn write_corpus_csv(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(CSV_HEADER)
        .expect("in-memory csv write");
    for item in corpus {
        let tags: Vec<&str> = item.tags.iter().map(String::as_str).collect();
        writer
            .write_record([
                item.id.as_str(),
                item.group.as_str(),
                item.name.as_str(),
                item.description.as_str(),
                &tags.join("|"),
            ])
            .expect("in-memory csv write");
    }
    let bytes = writer.into_inner().expect("in-memory csv flush");
    std::fs::write(path, bytes).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_corpus_json(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let text = serde_json::to_string_pretty(corpus).expect("corpus serializes");
    std::fs::write(path, text).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Deserialize)]
struct RatingEntry {
    #[serde(default)]
    relevant: BTreeSet<String>,
    #[serde(default)]
    non_relevant: BTreeSet<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RatingsFile {
    List(Vec<RatingSet>),
    ByUser(BTreeMap<String, RatingEntry>),
}

/// Load per-user ratings from JSON. Accepts either an array of rating-set
/// objects or a map keyed by user id.
pub fn load_ratings(path: &Path) -> Result<Vec<RatingSet>, CorpusError> {
    let text = read_file(path)?;
    let file: RatingsFile = serde_json::from_str(&text).map_err(|e| CorpusError::Format {
        path: path.display().to_string(),
        line: e.line() as u64,
        detail: e.to_string(),
    })?;
    let ratings = match file {
        RatingsFile::List(list) => list,
        RatingsFile::ByUser(map) => map
            .into_iter()
            .map(|(user_id, entry)| RatingSet {
                user_id,
                relevant: entry.relevant,
                non_relevant: entry.non_relevant,
            })
            .collect(),
    };
    let mut seen = BTreeSet::new();
    for rating in &ratings {
        if !seen.insert(rating.user_id.clone()) {
            return Err(CorpusError::DuplicateUser(rating.user_id.clone()));
        }
        rating.validate()?;
    }
    Ok(ratings)
}

pub fn write_ratings_json(ratings: &[RatingSet], path: &Path) -> Result<(), CorpusError> {
    let text = serde_json::to_string_pretty(ratings).expect("ratings serialize");
    std::fs::write(path, text).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Round-half-up share of `n` at `fraction`.
fn train_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64) + 0.5).floor() as usize
}

/// Seeded shuffle-and-cut split. Train gets round-half-up of the fraction;
/// both halves keep the original corpus order.
pub fn split_train_test(
    corpus: &Corpus,
    spec: &SplitSpec,
) -> Result<(Corpus, Corpus), CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(CorpusError::BadTrainFraction(spec.train_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train_indices: BTreeSet<usize> = BTreeSet::new();

    if spec.stratify_by_group {
        let mut by_group: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (idx, item) in corpus.iter().enumerate() {
            by_group.entry(&item.group).or_default().push(idx);
        }
        for indices in by_group.values() {
            let mut shuffled = indices.clone();
            shuffled.shuffle(&mut rng);
            train_indices.extend(&shuffled[..train_count(shuffled.len(), spec.train_fraction)]);
        }
    } else {
        let mut indices: Vec<usize> = (0..corpus.len()).collect();
        indices.shuffle(&mut rng);
        train_indices.extend(&indices[..train_count(indices.len(), spec.train_fraction)]);
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (idx, item) in corpus.iter().enumerate() {
        if train_indices.contains(&idx) {
            train.push(item.clone());
        } else {
            test.push(item.clone());
        }
    }
    Ok((Corpus { items: train }, Corpus { items: test }))
}
