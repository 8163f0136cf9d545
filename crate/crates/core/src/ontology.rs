//! Concept graph: classes, instances, typed relations with declared
//! inverses, semantic neighborhoods and item annotation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, FoodItem};
use crate::textpipe::Pipeline;

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("invalid ontology:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
    #[error("unknown concept id {0:?}")]
    UnknownConcept(String),
}

/// A concept is either a class or an instance of a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptKind {
    Class,
    Instance,
}

/// A node of the concept graph. `stems` are the stemmed surface forms that
/// trigger annotation matches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    pub label: String,
    pub kind: ConceptKind,
    #[serde(default)]
    pub stems: BTreeSet<String>,
}

/// A directed, typed edge between two concepts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub source: String,
    pub kind: String,
    pub target: String,
}

/// A set of concept ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptSet(BTreeSet<String>);

impl ConceptSet {
    pub fn new() -> Self {
        ConceptSet(BTreeSet::new())
    }

    pub fn insert(&mut self, id: impl Into<String>) {
        self.0.insert(id.into());
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.contains(id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::collections::btree_set::Iter<'_, String> {
        self.0.iter()
    }

    pub fn as_set(&self) -> &BTreeSet<String> {
        &self.0
    }

    pub fn intersection_len(&self, other: &ConceptSet) -> usize {
        self.0.intersection(&other.0).count()
    }

    pub fn union_len(&self, other: &ConceptSet) -> usize {
        self.0.union(&other.0).count()
    }

    pub fn union_with(&mut self, other: &ConceptSet) {
        self.0.extend(other.0.iter().cloned());
    }
}

impl FromIterator<String> for ConceptSet {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        ConceptSet(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a str> for ConceptSet {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        ConceptSet(iter.into_iter().map(str::to_owned).collect())
    }
}

impl From<BTreeSet<String>> for ConceptSet {
    fn from(set: BTreeSet<String>) -> Self {
        ConceptSet(set)
    }
}

impl<'a> IntoIterator for &'a ConceptSet {
    type Item = &'a String;
    type IntoIter = std::collections::btree_set::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// One failed ontology invariant. Violations are data; loading turns a
/// non-empty list into an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateConcept {
        id: String,
    },
    DanglingRelation {
        relation: String,
        missing: String,
    },
    MissingInverse {
        kind: String,
    },
    InverseNotInvolution {
        kind: String,
        inverse: String,
        back: String,
    },
    BadStem {
        concept: String,
        stem: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateConcept { id } => write!(f, "duplicate concept id {id:?}"),
            Violation::DanglingRelation { relation, missing } => {
                write!(
                    f,
                    "relation {relation} references unknown concept {missing:?}"
                )
            }
            Violation::MissingInverse { kind } => {
                write!(f, "relation kind {kind:?} has no declared inverse")
            }
            Violation::InverseNotInvolution {
                kind,
                inverse,
                back,
            } => write!(
                f,
                "inverse of inverse of {kind:?} is {back:?} (via {inverse:?}), expected {kind:?}"
            ),
            Violation::BadStem { concept, stem } => {
                write!(f, "concept {concept:?} has non-normalized stem {stem:?}")
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OntologyFile {
    #[serde(default)]
    concepts: Vec<Concept>,
    #[serde(default)]
    relations: Vec<Relation>,
    #[serde(default)]
    inverses: BTreeMap<String, String>,
}

/// The concept graph. Immutable after construction; all queries read-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "OntologyFile", into = "OntologyFile")]
pub struct Ontology {
    concepts: Vec<Concept>,
    relations: Vec<Relation>,
    inverses: BTreeMap<String, String>,
    index: BTreeMap<String, usize>,
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl From<OntologyFile> for Ontology {
    fn from(file: OntologyFile) -> Self {
        Ontology::new(file.concepts, file.relations, file.inverses)
    }
}

impl From<Ontology> for OntologyFile {
    fn from(onto: Ontology) -> Self {
        OntologyFile {
            concepts: onto.concepts,
            relations: onto.relations,
            inverses: onto.inverses,
        }
    }
}

impl Default for Ontology {
    fn default() -> Self {
        Ontology::new(Vec::new(), Vec::new(), BTreeMap::new())
    }
}

impl Ontology {
    /// Assemble an ontology without validating it; call [`Ontology::validate`]
    /// to collect violations. [`load_ontology`] does both.
    pub fn new(
        concepts: Vec<Concept>,
        relations: Vec<Relation>,
        inverses: BTreeMap<String, String>,
    ) -> Self {
        let mut index = BTreeMap::new();
        for (i, concept) in concepts.iter().enumerate() {
            index.entry(concept.id.clone()).or_insert(i);
        }
        let mut adjacency: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for relation in &relations {
            adjacency
                .entry(relation.source.clone())
                .or_default()
                .insert(relation.target.clone());
            adjacency
                .entry(relation.target.clone())
                .or_default()
                .insert(relation.source.clone());
        }
        Ontology {
            concepts,
            relations,
            inverses,
            index,
            adjacency,
        }
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.index.get(id).map(|&i| &self.concepts[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn concept_ids(&self) -> BTreeSet<String> {
        self.index.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Declared or implied inverse of a relation kind.
    pub fn inverse_of(&self, kind: &str) -> Option<&str> {
        if let Some(inv) = self.inverses.get(kind) {
            return Some(inv);
        }
        self.inverses
            .iter()
            .find(|(_, v)| *v == kind)
            .map(|(k, _)| k.as_str())
    }

    /// Check every structural invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();

        let mut seen = BTreeSet::new();
        for concept in &self.concepts {
            if !seen.insert(&concept.id) {
                violations.push(Violation::DuplicateConcept {
                    id: concept.id.clone(),
                });
            }
            for stem in &concept.stems {
                let normalized = !stem.is_empty()
                    && stem
                        .chars()
                        .all(|c| c.is_alphanumeric() && !c.is_uppercase());
                if !normalized {
                    violations.push(Violation::BadStem {
                        concept: concept.id.clone(),
                        stem: stem.clone(),
                    });
                }
            }
        }

        for relation in &self.relations {
            let display = format!(
                "{} -{}-> {}",
                relation.source, relation.kind, relation.target
            );
            for endpoint in [&relation.source, &relation.target] {
                if !self.contains(endpoint) {
                    violations.push(Violation::DanglingRelation {
                        relation: display.clone(),
                        missing: endpoint.clone(),
                    });
                }
            }
            let declared = self.inverses.contains_key(&relation.kind)
                || self.inverses.values().any(|v| v == &relation.kind);
            if !declared {
                violations.push(Violation::MissingInverse {
                    kind: relation.kind.clone(),
                });
            }
        }

        let mut owners: BTreeMap<&String, &String> = BTreeMap::new();
        for (kind, inverse) in &self.inverses {
            if let Some(back) = self.inverses.get(inverse) {
                if back != kind {
                    violations.push(Violation::InverseNotInvolution {
                        kind: kind.clone(),
                        inverse: inverse.clone(),
                        back: back.clone(),
                    });
                }
            }
            // Two kinds claiming the same inverse make the implied closure
            // ambiguous, which also breaks the involution.
            if let Some(previous) = owners.insert(inverse, kind) {
                if previous != kind {
                    violations.push(Violation::InverseNotInvolution {
                        kind: kind.clone(),
                        inverse: inverse.clone(),
                        back: previous.clone(),
                    });
                }
            }
        }

        violations
    }

    /// Semantic neighborhood: the concept itself plus every concept one
    /// relation edge away, in either direction, of any kind.
    pub fn neighborhood(&self, id: &str) -> Result<ConceptSet, OntologyError> {
        if !self.contains(id) {
            return Err(OntologyError::UnknownConcept(id.to_owned()));
        }
        let mut set = ConceptSet::new();
        set.insert(id);
        if let Some(neighbors) = self.adjacency.get(id) {
            for neighbor in neighbors {
                set.insert(neighbor.clone());
            }
        }
        Ok(set)
    }

    /// Concepts whose stems intersect the preprocessed text. Matching is
    /// exact stem equality.
    pub fn annotate_text(&self, pipeline: &Pipeline, text: &str) -> ConceptSet {
        let terms: BTreeSet<String> = pipeline.preprocess(text).into_vec().into_iter().collect();
        self.concepts
            .iter()
            .filter(|c| c.stems.iter().any(|s| terms.contains(s)))
            .map(|c| c.id.clone())
            .collect()
    }

    /// Concepts matching the item's name plus description.
    pub fn annotate(&self, pipeline: &Pipeline, item: &FoodItem) -> ConceptSet {
        self.annotate_text(pipeline, &item.text())
    }

    /// Annotate every item in place, storing the concept sets on the items.
    pub fn annotate_corpus(&self, pipeline: &Pipeline, corpus: &mut Corpus) {
        for item in corpus.items_mut() {
            item.concepts = self.annotate(pipeline, item).0;
        }
    }
}

/// Load and validate an ontology from its JSON format.
pub fn load_ontology(path: &Path) -> Result<Ontology, OntologyError> {
    let text = std::fs::read_to_string(path).map_err(|source| OntologyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let ontology: Ontology = serde_json::from_str(&text).map_err(|e| OntologyError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let violations = ontology.validate();
    if violations.is_empty() {
        Ok(ontology)
    } else {
        Err(OntologyError::Invalid(violations))
    }
}

pub fn write_ontology_json(onto: &Ontology, path: &Path) -> Result<(), OntologyError> {
    let text = serde_json::to_string_pretty(onto).expect("ontology serializes");
    std::fs::write(path, text).map_err(|source| OntologyError::Io {
        path: path.display().to_string(),
        source,
    })
}
