//! Score candidate items against a profile with a configured measure,
//! apply the cut-off, and return ranked recommendations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, FoodItem};
use crate::heuristics::BoostContext;
use crate::ontology::{ConceptSet, Ontology};
use crate::profile::{ProfileError, TfIdfModel, UserProfile};
use crate::similarity::{
    binary_cosine, concept_equivalence, expand, jaccard, proposed_score, semrel, tfidf_cosine,
    BinaryCosineVariant, BlendParams, MeasureKind,
};

pub const DEFAULT_CUTOFF: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("measure {0} needs an ontology, but none was supplied")]
    OntologyRequired(MeasureKind),
    #[error("cutoff {0} is outside [0, 1]")]
    BadCutoff(f64),
    #[error("top_k must be at least 1")]
    BadTopK,
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Measure choice plus every knob that influences a score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecommenderConfig {
    pub measure: MeasureKind,
    pub cutoff: f64,
    pub top_k: Option<usize>,
    pub blend: BlendParams,
    pub bcosine_variant: BinaryCosineVariant,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            measure: MeasureKind::Proposed,
            cutoff: DEFAULT_CUTOFF,
            top_k: None,
            blend: BlendParams::default(),
            bcosine_variant: BinaryCosineVariant::default(),
        }
    }
}

impl RecommenderConfig {
    pub fn validate(&self) -> Result<(), ScoreError> {
        if !(0.0..=1.0).contains(&self.cutoff) {
            return Err(ScoreError::BadCutoff(self.cutoff));
        }
        if self.top_k == Some(0) {
            return Err(ScoreError::BadTopK);
        }
        Ok(())
    }
}

/// One recommended item; emitted only when its score beats the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub item_id: String,
    pub score: f64,
    pub measure: MeasureKind,
}

/// Score one item under the configured measure. Concept measures treat the
/// profile as a pseudo-item carrying its concept set and require an
/// ontology; annotations unknown to the ontology are ignored.
pub fn score_item(
    profile: &UserProfile,
    item: &FoodItem,
    model: &TfIdfModel,
    onto: Option<&Ontology>,
    ctx: &BoostContext,
    cfg: &RecommenderConfig,
) -> Result<f64, ScoreError> {
    let need_onto = || onto.ok_or(ScoreError::OntologyRequired(cfg.measure));
    let item_concepts = || -> ConceptSet { item.concepts.clone().into() };
    let score = match cfg.measure {
        MeasureKind::TfIdfCosine => {
            tfidf_cosine(&profile.term_weights, &model.item_vector(&item.id)?)
        }
        MeasureKind::ConceptEquivalence => {
            need_onto()?;
            concept_equivalence(&profile.concepts, &item_concepts())
        }
        MeasureKind::BinaryCosine => {
            need_onto()?;
            binary_cosine(&profile.concepts, &item_concepts(), cfg.bcosine_variant)
        }
        MeasureKind::Jaccard => {
            need_onto()?;
            jaccard(&profile.concepts, &item_concepts())
        }
        MeasureKind::SemanticRelatedness => {
            let onto = need_onto()?;
            let known = |set: &ConceptSet| -> ConceptSet {
                set.iter().filter(|id| onto.contains(id)).cloned().collect()
            };
            let expanded = |set: &ConceptSet| {
                expand(onto, &known(set), None, cfg.blend.lambda)
                    .expect("concepts filtered to known ids")
            };
            semrel(&expanded(&profile.concepts), &expanded(&item_concepts()))
        }
        MeasureKind::Proposed => {
            let onto = need_onto()?;
            proposed_score(
                profile,
                item,
                &model.item_vector(&item.id)?,
                onto,
                ctx,
                &cfg.blend,
            )
        }
    };
    Ok(score)
}

/// Score every candidate, keep the ones strictly above the cutoff, sort by
/// descending score with ascending item id as the tie break, and truncate
/// to `top_k` when set.
pub fn recommend(
    profile: &UserProfile,
    candidates: &Corpus,
    model: &TfIdfModel,
    onto: Option<&Ontology>,
    ctx: &BoostContext,
    cfg: &RecommenderConfig,
) -> Result<Vec<Recommendation>, ScoreError> {
    cfg.validate()?;
    let mut recommendations = Vec::new();
    for item in candidates {
        let score = score_item(profile, item, model, onto, ctx, cfg)?;
        if score > cfg.cutoff {
            recommendations.push(Recommendation {
                item_id: item.id.clone(),
                score,
                measure: cfg.measure,
            });
        }
    }
    recommendations.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.item_id.cmp(&b.item_id))
    });
    if let Some(k) = cfg.top_k {
        recommendations.truncate(k);
    }
    Ok(recommendations)
}
