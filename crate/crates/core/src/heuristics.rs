//! Nutrition heuristics as trigger-term rules that boost matching item
//! tags. Rules only promote: every factor is at least 1.0, and combined
//! factors are capped.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::FoodItem;
use crate::textpipe::TermList;

/// Boost applied per matching tag when a rule file gives none.
pub const DEFAULT_BOOST: f64 = 1.25;
/// Upper bound on the combined boost factor for a single item.
pub const DEFAULT_BOOST_CAP: f64 = 2.0;

const DEFAULT_RULES: &str = include_str!("../data/default_rules.json");

#[derive(Debug, Error)]
pub enum RulesError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("rule {id}: boost {boost} is below 1.0")]
    BoostTooSmall { id: String, boost: f64 },
    #[error("rule {id}: trigger terms must not be empty")]
    EmptyTrigger { id: String },
    #[error("rule {id}: tag {tag:?} is not lowercase")]
    TagNotLowercase { id: String, tag: String },
}

/// Trigger terms matched against the preprocessed query or profile; on a
/// match, items carrying any boosted tag get the multiplicative boost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicRule {
    pub id: String,
    pub trigger_terms: std::collections::BTreeSet<String>,
    pub boosted_tags: std::collections::BTreeSet<String>,
    #[serde(default = "default_boost")]
    pub boost: f64,
}

fn default_boost() -> f64 {
    DEFAULT_BOOST
}

impl HeuristicRule {
    pub fn validate(&self) -> Result<(), RulesError> {
        if self.boost < 1.0 {
            return Err(RulesError::BoostTooSmall {
                id: self.id.clone(),
                boost: self.boost,
            });
        }
        if self.trigger_terms.is_empty() {
            return Err(RulesError::EmptyTrigger {
                id: self.id.clone(),
            });
        }
        for tag in &self.boosted_tags {
            if tag.chars().any(char::is_uppercase) {
                return Err(RulesError::TagNotLowercase {
                    id: self.id.clone(),
                    tag: tag.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Per-tag combined boost factors for the current query or profile. Tags
/// without an entry have an implicit factor of 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostContext {
    factors: BTreeMap<String, f64>,
    cap: f64,
}

impl Default for BoostContext {
    fn default() -> Self {
        BoostContext::empty()
    }
}

impl BoostContext {
    /// Context with no active boosts; every item gets factor 1.0.
    pub fn empty() -> Self {
        BoostContext {
            factors: BTreeMap::new(),
            cap: DEFAULT_BOOST_CAP,
        }
    }

    pub fn factor_for_tag(&self, tag: &str) -> f64 {
        self.factors.get(tag).copied().unwrap_or(1.0)
    }

    pub fn active_tags(&self) -> impl Iterator<Item = (&str, f64)> {
        self.factors.iter().map(|(tag, f)| (tag.as_str(), *f))
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }
}

/// Parse and validate rules from a JSON file.
pub fn load_rules(path: &Path) -> Result<Vec<HeuristicRule>, RulesError> {
    let text = std::fs::read_to_string(path).map_err(|source| RulesError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let rules: Vec<HeuristicRule> = serde_json::from_str(&text).map_err(|e| RulesError::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    for rule in &rules {
        rule.validate()?;
    }
    Ok(rules)
}

/// The bundled default rule set (currently the breakfast-to-hot rule).
pub fn default_rules() -> Vec<HeuristicRule> {
    serde_json::from_str(DEFAULT_RULES).expect("bundled rules parse")
}

/// Combine every rule whose trigger terms intersect the query terms into a
/// per-tag factor map. Factors multiply when several rules boost one tag.
pub fn activate(rules: &[HeuristicRule], query_terms: &TermList, cap: f64) -> BoostContext {
    let mut factors: BTreeMap<String, f64> = BTreeMap::new();
    for rule in rules {
        let triggered = rule
            .trigger_terms
            .iter()
            .any(|t| query_terms.iter().any(|q| q == t));
        if triggered {
            for tag in &rule.boosted_tags {
                *factors.entry(tag.clone()).or_insert(1.0) *= rule.boost;
            }
        }
    }
    BoostContext { factors, cap }
}

/// Product of the context factors for tags present on the item, capped.
/// Always at least 1.0; exactly 1.0 when nothing matches.
pub fn boost_factor(ctx: &BoostContext, item: &FoodItem) -> f64 {
    let product: f64 = item
        .tags
        .iter()
        .map(|tag| ctx.factor_for_tag(tag))
        .product();
    product.min(ctx.cap)
}
