//! Food recommender engine and evaluation bench.
//!
//! Scores food items against user profiles with TF-IDF term weighting,
//! ontology-based concept-set similarity and heuristic tag boosting, and
//! reproduces a train/test evaluation protocol with confusion-matrix
//! metrics per user and measure.

pub mod corpus;
pub mod eval;
pub mod heuristics;
pub mod ontology;
pub mod profile;
pub mod recommender;
pub mod similarity;
pub mod textpipe;

pub use corpus::{Corpus, FoodItem, RatingSet, SplitSpec};
pub use eval::{ConfusionMatrix, EvalConfig, EvalOutcome, EvalRow, Metrics};
pub use heuristics::{BoostContext, HeuristicRule};
pub use ontology::{Concept, ConceptSet, Ontology, Relation};
pub use profile::{TermWeightVector, TfIdfModel, UserProfile};
pub use recommender::{Recommendation, RecommenderConfig};
pub use similarity::{BinaryCosineVariant, BlendParams, MeasureKind, WeightedConceptVector};
pub use textpipe::{Pipeline, TermList};
