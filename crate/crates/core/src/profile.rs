//! User profiles: TF-IDF term-weight vectors and concept sets built from
//! the relevant training items.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::ontology::{ConceptSet, Ontology};
use crate::textpipe::{Pipeline, TermList};

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("term frequency of an empty term list is undefined")]
    EmptyTermList,
    #[error("user {0} has no relevant training items (cold start)")]
    ColdStart(String),
    #[error("item {0} is not indexed in the term model")]
    ItemNotIndexed(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {detail}")]
    Parse { path: String, detail: String },
}

/// Sparse nonnegative term weights; zero-weight entries are never stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermWeightVector(BTreeMap<String, f64>);

impl TermWeightVector {
    pub fn new() -> Self {
        TermWeightVector(BTreeMap::new())
    }

    /// Build from (term, weight) pairs, dropping non-positive weights.
    pub fn from_weights<I>(weights: I) -> Self
    where
        I: IntoIterator<Item = (String, f64)>,
    {
        TermWeightVector(weights.into_iter().filter(|(_, w)| *w > 0.0).collect())
    }

    pub fn get(&self, term: &str) -> f64 {
        self.0.get(term).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, f64)> {
        self.0.iter().map(|(t, w)| (t, *w))
    }

    pub fn terms(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    /// Scale every weight by a positive constant.
    pub fn scaled(&self, factor: f64) -> Self {
        TermWeightVector::from_weights(self.iter().map(|(t, w)| (t.clone(), w * factor)))
    }
}

impl FromIterator<(String, f64)> for TermWeightVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        TermWeightVector::from_weights(iter)
    }
}

/// Logarithm base for IDF. Cosine scores are invariant to the choice, so
/// it only exists to demonstrate that invariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Base10,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Base10 => x.log10(),
        }
    }
}

/// Which items count toward document frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdfScope {
    /// The whole corpus, train and test alike (computed once at ingestion).
    #[default]
    Full,
    /// Training items only.
    Train,
}

/// Preprocessed term lists and document frequencies for a corpus, built
/// once and then read-only.
#[derive(Debug, Clone)]
pub struct TfIdfModel {
    item_terms: BTreeMap<String, TermList>,
    doc_freq: BTreeMap<String, usize>,
    doc_count: usize,
    log_base: LogBase,
}

impl TfIdfModel {
    /// Index the corpus; document frequencies cover every item.
    pub fn build(corpus: &Corpus, pipeline: &Pipeline) -> Self {
        Self::build_scoped(corpus, pipeline, None)
    }

    /// Index the corpus, counting document frequencies only over the items
    /// in `df_scope` when given.
    pub fn build_scoped(
        corpus: &Corpus,
        pipeline: &Pipeline,
        df_scope: Option<&BTreeSet<String>>,
    ) -> Self {
        let mut item_terms = BTreeMap::new();
        let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
        let mut doc_count = 0usize;
        for item in corpus {
            let terms = pipeline.preprocess(&item.text());
            let in_scope = df_scope.is_none_or(|scope| scope.contains(&item.id));
            if in_scope {
                doc_count += 1;
                let distinct: BTreeSet<&String> = terms.iter().collect();
                for term in distinct {
                    *doc_freq.entry(term.clone()).or_insert(0) += 1;
                }
            }
            item_terms.insert(item.id.clone(), terms);
        }
        TfIdfModel {
            item_terms,
            doc_freq,
            doc_count,
            log_base: LogBase::default(),
        }
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    /// Number of documents counted for IDF.
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    /// Number of in-scope documents whose term list contains the term.
    pub fn doc_freq(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    /// Inverse document frequency, log(total / df). Zero when the term is
    /// ubiquitous and, by decision, when it occurs nowhere.
    pub fn idf(&self, term: &str) -> f64 {
        let df = self.doc_freq(term);
        if df == 0 || self.doc_count == 0 {
            return 0.0;
        }
        self.log_base.log(self.doc_count as f64 / df as f64)
    }

    pub fn item_terms(&self, item_id: &str) -> Option<&TermList> {
        self.item_terms.get(item_id)
    }

    /// TF-IDF weight of one term within an item's term list.
    pub fn tfidf(&self, term: &str, item_terms: &TermList) -> Result<f64, ProfileError> {
        Ok(tf(term, item_terms)? * self.idf(term))
    }

    /// Full TF-IDF vector for an arbitrary term list. Empty lists yield an
    /// empty vector so cold items can still be scored.
    pub fn vector_for_terms(&self, terms: &TermList) -> TermWeightVector {
        if terms.is_empty() {
            return TermWeightVector::new();
        }
        let total = terms.len() as f64;
        let mut counts: BTreeMap<&String, usize> = BTreeMap::new();
        for term in terms {
            *counts.entry(term).or_insert(0) += 1;
        }
        counts
            .into_iter()
            .map(|(term, count)| (term.clone(), (count as f64 / total) * self.idf(term)))
            .collect()
    }

    /// TF-IDF vector of an indexed item.
    pub fn item_vector(&self, item_id: &str) -> Result<TermWeightVector, ProfileError> {
        self.item_terms
            .get(item_id)
            .map(|terms| self.vector_for_terms(terms))
            .ok_or_else(|| ProfileError::ItemNotIndexed(item_id.to_owned()))
    }
}

/// Term frequency: occurrences of the term divided by the total number of
/// terms in the list.
pub fn tf(term: &str, item_terms: &TermList) -> Result<f64, ProfileError> {
    if item_terms.is_empty() {
        return Err(ProfileError::EmptyTermList);
    }
    let count = item_terms.iter().filter(|t| *t == term).count();
    Ok(count as f64 / item_terms.len() as f64)
}

/// A user's averaged TF-IDF vector and the concepts found in their
/// relevant training items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub term_weights: TermWeightVector,
    pub concepts: ConceptSet,
}

/// Build a profile from the user's relevant training items: the arithmetic
/// mean of their TF-IDF vectors and the union of their annotations.
pub fn build_profile(
    user_id: &str,
    relevant_ids: &BTreeSet<String>,
    train: &Corpus,
    onto: &Ontology,
    pipeline: &Pipeline,
    model: &TfIdfModel,
) -> Result<UserProfile, ProfileError> {
    let relevant_items: Vec<_> = train
        .iter()
        .filter(|item| relevant_ids.contains(&item.id))
        .collect();
    if relevant_items.is_empty() {
        return Err(ProfileError::ColdStart(user_id.to_owned()));
    }

    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    let mut concepts = ConceptSet::new();
    for item in &relevant_items {
        let vector = model.item_vector(&item.id)?;
        for (term, weight) in vector.iter() {
            *sums.entry(term.clone()).or_insert(0.0) += weight;
        }
        concepts.union_with(&onto.annotate(pipeline, item));
    }
    let n = relevant_items.len() as f64;
    let term_weights = sums.into_iter().map(|(t, w)| (t, w / n)).collect();

    Ok(UserProfile {
        user_id: user_id.to_owned(),
        term_weights,
        concepts,
    })
}

pub fn write_profile_json(profile: &UserProfile, path: &Path) -> Result<(), ProfileError> {
    let text = serde_json::to_string_pretty(profile).expect("profile serializes");
    std::fs::write(path, text).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_profile_json(path: &Path) -> Result<UserProfile, ProfileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| ProfileError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::FoodItem;
    use crate::ontology::{Concept, ConceptKind};

    fn terms(words: &[&str]) -> TermList {
        TermList::new(words.iter().map(|w| (*w).to_owned()).collect())
    }

    fn item(id: &str, description: &str) -> FoodItem {
        FoodItem {
            id: id.to_owned(),
            group: "G".into(),
            name: String::new(),
            description: description.to_owned(),
            tags: BTreeSet::new(),
            concepts: BTreeSet::new(),
        }
    }

    fn tiny_ontology() -> Ontology {
        let concept = |id: &str, stem: &str| Concept {
            id: id.into(),
            label: id.into(),
            kind: ConceptKind::Class,
            stems: BTreeSet::from([stem.to_owned()]),
        };
        Ontology::new(
            vec![concept("Banana", "banana"), concept("Juice", "juic")],
            Vec::new(),
            BTreeMap::new(),
        )
    }

    #[test]
    fn tf_counts_occurrences() {
        let list = terms(&["a", "b", "a", "c", "d", "e", "f", "g", "h", "i"]);
        assert!((tf("a", &list).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn tf_absent_term_is_zero() {
        assert_eq!(tf("z", &terms(&["a", "b"])).unwrap(), 0.0);
    }

    #[test]
    fn tf_single_term_item_is_one() {
        assert_eq!(tf("a", &terms(&["a"])).unwrap(), 1.0);
    }

    #[test]
    fn tf_empty_list_is_an_error() {
        assert!(matches!(
            tf("a", &TermList::default()),
            Err(ProfileError::EmptyTermList)
        ));
    }

    fn four_item_corpus() -> Corpus {
        // "banana" appears in 2 of 4 items, "food" in all 4.
        Corpus::new(vec![
            item("i1", "banana food"),
            item("i2", "banana food"),
            item("i3", "carrot food"),
            item("i4", "lentil food"),
        ])
        .unwrap()
    }

    #[test]
    fn idf_is_log_of_inverse_share() {
        let model = TfIdfModel::build(&four_item_corpus(), &Pipeline::new());
        assert!((model.idf("banana") - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn idf_ubiquitous_term_is_zero() {
        let model = TfIdfModel::build(&four_item_corpus(), &Pipeline::new());
        assert_eq!(model.idf("food"), 0.0);
    }

    #[test]
    fn idf_unseen_term_is_zero() {
        let model = TfIdfModel::build(&four_item_corpus(), &Pipeline::new());
        assert_eq!(model.idf("dragonfruit"), 0.0);
    }

    #[test]
    fn tfidf_is_product() {
        let model = TfIdfModel::build(&four_item_corpus(), &Pipeline::new());
        let list = terms(&["banana", "b", "c", "d", "e", "f", "g", "h", "i", "banana"]);
        let value = model.tfidf("banana", &list).unwrap();
        assert!((value - 0.2 * 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn tfidf_absent_and_ubiquitous_are_zero() {
        let model = TfIdfModel::build(&four_item_corpus(), &Pipeline::new());
        let list = terms(&["banana", "food"]);
        assert_eq!(model.tfidf("dragonfruit", &list).unwrap(), 0.0);
        assert_eq!(model.tfidf("food", &list).unwrap(), 0.0);
    }

    #[test]
    fn item_vector_drops_zero_weights() {
        let model = TfIdfModel::build(&four_item_corpus(), &Pipeline::new());
        let vector = model.item_vector("i1").unwrap();
        // "food" is ubiquitous, so only "banana" survives.
        assert_eq!(vector.len(), 1);
        assert!(vector.get("banana") > 0.0);
    }

    #[test]
    fn base10_idf_is_a_global_rescale() {
        let corpus = four_item_corpus();
        let natural = TfIdfModel::build(&corpus, &Pipeline::new());
        let base10 = TfIdfModel::build(&corpus, &Pipeline::new()).with_log_base(LogBase::Base10);
        let scale = 10.0f64.ln();
        for term in ["banana", "carrot", "lentil"] {
            assert!((natural.idf(term) / base10.idf(term) - scale).abs() < 1e-9);
        }
    }

    #[test]
    fn scoped_model_counts_df_over_scope_only() {
        let corpus = four_item_corpus();
        let scope: BTreeSet<String> = ["i1", "i3"].map(str::to_owned).into();
        let model = TfIdfModel::build_scoped(&corpus, &Pipeline::new(), Some(&scope));
        assert_eq!(model.doc_count(), 2);
        assert_eq!(model.doc_freq("banana"), 1);
        // Out-of-scope items are still indexed for scoring.
        assert!(model.item_terms("i2").is_some());
    }

    #[test]
    fn profile_of_one_item_equals_its_vector() {
        let corpus = four_item_corpus();
        let pipeline = Pipeline::new();
        let model = TfIdfModel::build(&corpus, &pipeline);
        let onto = tiny_ontology();
        let relevant: BTreeSet<String> = ["i1".to_owned()].into();
        let profile = build_profile("u1", &relevant, &corpus, &onto, &pipeline, &model).unwrap();
        assert_eq!(profile.term_weights, model.item_vector("i1").unwrap());
        assert!(profile.concepts.contains("Banana"));
        assert_eq!(profile.concepts.len(), 1);
    }

    #[test]
    fn profile_unions_concepts() {
        let corpus = Corpus::new(vec![
            item("i1", "banana split"),
            item("i2", "juice box"),
            item("i3", "carrot"),
        ])
        .unwrap();
        let pipeline = Pipeline::new();
        let model = TfIdfModel::build(&corpus, &pipeline);
        let onto = tiny_ontology();
        let relevant: BTreeSet<String> = ["i1", "i2"].map(str::to_owned).into();
        let profile = build_profile("u1", &relevant, &corpus, &onto, &pipeline, &model).unwrap();
        assert!(profile.concepts.contains("Banana"));
        assert!(profile.concepts.contains("Juice"));
    }

    #[test]
    fn profile_averages_term_weights() {
        let corpus = four_item_corpus();
        let pipeline = Pipeline::new();
        let model = TfIdfModel::build(&corpus, &pipeline);
        let onto = tiny_ontology();
        let relevant: BTreeSet<String> = ["i1", "i3"].map(str::to_owned).into();
        let profile = build_profile("u1", &relevant, &corpus, &onto, &pipeline, &model).unwrap();
        let expected = (model.item_vector("i1").unwrap().get("banana")
            + model.item_vector("i3").unwrap().get("banana"))
            / 2.0;
        assert!((profile.term_weights.get("banana") - expected).abs() < 1e-12);
    }

    #[test]
    fn cold_start_user_is_an_error() {
        let corpus = four_item_corpus();
        let pipeline = Pipeline::new();
        let model = TfIdfModel::build(&corpus, &pipeline);
        let onto = tiny_ontology();
        let relevant: BTreeSet<String> = BTreeSet::new();
        assert!(matches!(
            build_profile("u1", &relevant, &corpus, &onto, &pipeline, &model),
            Err(ProfileError::ColdStart(_))
        ));
    }

    #[test]
    fn profile_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.json");
        let profile = UserProfile {
            user_id: "u1".into(),
            term_weights: TermWeightVector::from_weights([("banana".to_owned(), 0.4)]),
            concepts: ["Banana"].into_iter().collect(),
        };
        write_profile_json(&profile, &path).unwrap();
        assert_eq!(load_profile_json(&path).unwrap(), profile);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Summing tf over the distinct terms of an item gives 1.
            #[test]
            fn tf_sums_to_one(words in proptest::collection::vec("[a-e]", 1..30)) {
                let list = TermList::new(words);
                let distinct: BTreeSet<&String> = list.iter().collect();
                let total: f64 = distinct.iter().map(|t| tf(t, &list).unwrap()).sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
            }

            #[test]
            fn weights_are_nonnegative_and_nonzero(
                entries in proptest::collection::btree_map("[a-e]", -1.0f64..2.0, 0..8)
            ) {
                let vector = TermWeightVector::from_weights(entries);
                for (_, w) in vector.iter() {
                    prop_assert!(w > 0.0);
                }
            }
        }
    }
}
