//! The scoring functions: TF-IDF cosine, concept equivalence, binary
//! cosine (product and square-root denominator variants), Jaccard,
//! neighborhood-expanded semantic relatedness, and the blended
//! proposed measure.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::FoodItem;
use crate::heuristics::{boost_factor, BoostContext};
use crate::ontology::{ConceptSet, Ontology, OntologyError};
use crate::profile::{TermWeightVector, UserProfile};

/// The six measures an evaluation run can be tagged with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "tfidf")]
    TfIdfCosine,
    #[serde(rename = "equivalence")]
    ConceptEquivalence,
    #[serde(rename = "bcosine")]
    BinaryCosine,
    #[serde(rename = "jaccard")]
    Jaccard,
    #[serde(rename = "semrel")]
    SemanticRelatedness,
    #[serde(rename = "proposed")]
    Proposed,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 6] = [
        MeasureKind::TfIdfCosine,
        MeasureKind::ConceptEquivalence,
        MeasureKind::BinaryCosine,
        MeasureKind::Jaccard,
        MeasureKind::SemanticRelatedness,
        MeasureKind::Proposed,
    ];

    /// Short name used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::TfIdfCosine => "tfidf",
            MeasureKind::ConceptEquivalence => "equivalence",
            MeasureKind::BinaryCosine => "bcosine",
            MeasureKind::Jaccard => "jaccard",
            MeasureKind::SemanticRelatedness => "semrel",
            MeasureKind::Proposed => "proposed",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tfidf" => Ok(MeasureKind::TfIdfCosine),
            "equivalence" => Ok(MeasureKind::ConceptEquivalence),
            "bcosine" => Ok(MeasureKind::BinaryCosine),
            "jaccard" => Ok(MeasureKind::Jaccard),
            "semrel" => Ok(MeasureKind::SemanticRelatedness),
            "proposed" => Ok(MeasureKind::Proposed),
            other => Err(format!(
                "unknown measure {other:?} (expected tfidf|equivalence|bcosine|jaccard|semrel|proposed)"
            )),
        }
    }
}

/// Denominator used by the binary cosine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryCosineVariant {
    /// Intersection over the plain product |U|*|A|.
    #[default]
    Paper,
    /// Intersection over sqrt(|U|*|A|), the Otsuka-Ochiai form.
    Standard,
}

impl FromStr for BinaryCosineVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(BinaryCosineVariant::Paper),
            "standard" => Ok(BinaryCosineVariant::Standard),
            other => Err(format!(
                "unknown binary cosine variant {other:?} (expected paper|standard)"
            )),
        }
    }
}

/// Sparse nonnegative concept weights; zero entries are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedConceptVector(BTreeMap<String, f64>);

impl WeightedConceptVector {
    pub fn new() -> Self {
        WeightedConceptVector(BTreeMap::new())
    }

    pub fn from_weights<I>(weights: I) -> Self
    where
        I: IntoIterator<Item = (String, f64)>,
    {
        WeightedConceptVector(weights.into_iter().filter(|(_, w)| *w > 0.0).collect())
    }

    pub fn get(&self, concept: &str) -> f64 {
        self.0.get(concept).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, f64)> {
        self.0.iter().map(|(c, w)| (c, *w))
    }
}

impl FromIterator<(String, f64)> for WeightedConceptVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        WeightedConceptVector::from_weights(iter)
    }
}

/// 1 when the two concept sets share at least one concept, else 0.
pub fn concept_equivalence(u: &ConceptSet, a: &ConceptSet) -> f64 {
    if u.intersection_len(a) > 0 {
        1.0
    } else {
        0.0
    }
}

/// Binary cosine of two concept sets. The `Paper` variant divides the
/// intersection size by the plain product of the set sizes; the
/// `Standard` variant divides by its square root (Otsuka-Ochiai). Empty
/// sets score 0.
pub fn binary_cosine(u: &ConceptSet, a: &ConceptSet, variant: BinaryCosineVariant) -> f64 {
    if u.is_empty() || a.is_empty() {
        return 0.0;
    }
    let intersection = u.intersection_len(a) as f64;
    let product = (u.len() * a.len()) as f64;
    match variant {
        BinaryCosineVariant::Paper => intersection / product,
        BinaryCosineVariant::Standard => intersection / product.sqrt(),
    }
}

/// Intersection size over union size; 0 when both sets are empty.
pub fn jaccard(u: &ConceptSet, a: &ConceptSet) -> f64 {
    let union = u.union_len(a);
    if union == 0 {
        return 0.0;
    }
    u.intersection_len(a) as f64 / union as f64
}

/// Expand a concept set into a weighted vector: each member keeps its base
/// weight (default 1.0) and each 1-hop neighbor outside the set gets the
/// decayed weight lambda * base. Overlapping contributions take the
/// maximum.
pub fn expand(
    onto: &Ontology,
    concepts: &ConceptSet,
    base_weights: Option<&BTreeMap<String, f64>>,
    lambda: f64,
) -> Result<WeightedConceptVector, OntologyError> {
    let base = |id: &str| base_weights.and_then(|m| m.get(id).copied()).unwrap_or(1.0);
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    let mut bump = |id: &str, w: f64| {
        let entry = weights.entry(id.to_owned()).or_insert(0.0);
        if w > *entry {
            *entry = w;
        }
    };
    for concept in concepts {
        let own = base(concept);
        bump(concept, own);
        for neighbor in &onto.neighborhood(concept)? {
            if !concepts.contains(neighbor) {
                bump(neighbor, lambda * own);
            }
        }
    }
    Ok(WeightedConceptVector::from_weights(weights))
}

fn cosine<'a, I, J>(left: I, right_get: J, left_norm_sq: f64, right_norm_sq: f64) -> f64
where
    I: Iterator<Item = (&'a String, f64)>,
    J: Fn(&str) -> f64,
{
    if left_norm_sq == 0.0 || right_norm_sq == 0.0 {
        return 0.0;
    }
    let dot: f64 = left.map(|(key, w)| w * right_get(key)).sum();
    dot / (left_norm_sq.sqrt() * right_norm_sq.sqrt())
}

/// Cosine of two weighted concept vectors; in [0, 1] because all weights
/// are nonnegative. Zero if either vector is empty.
pub fn semrel(v_i: &WeightedConceptVector, v_j: &WeightedConceptVector) -> f64 {
    let norm_sq = |v: &WeightedConceptVector| v.iter().map(|(_, w)| w * w).sum::<f64>();
    cosine(v_i.iter(), |key| v_j.get(key), norm_sq(v_i), norm_sq(v_j))
}

/// Cosine of two term-weight vectors; zero if either is empty.
pub fn tfidf_cosine(u: &TermWeightVector, a: &TermWeightVector) -> f64 {
    let norm_sq = |v: &TermWeightVector| v.iter().map(|(_, w)| w * w).sum::<f64>();
    cosine(u.iter(), |key| a.get(key), norm_sq(u), norm_sq(a))
}

/// Parameters of the blended proposed measure: `alpha` weighs the TF-IDF
/// cosine against the expanded semantic relatedness, `lambda` is the
/// neighborhood decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlendParams {
    pub alpha: f64,
    pub lambda: f64,
}

impl Default for BlendParams {
    fn default() -> Self {
        BlendParams {
            alpha: 0.5,
            lambda: 0.5,
        }
    }
}

/// The blended measure: convex combination of TF-IDF cosine and expanded
/// semantic relatedness, multiplied by the heuristic boost and clamped
/// back into [0, 1]. Concepts unknown to the ontology are ignored.
pub fn proposed_score(
    profile: &UserProfile,
    item: &FoodItem,
    item_vector: &TermWeightVector,
    onto: &Ontology,
    ctx: &BoostContext,
    params: &BlendParams,
) -> f64 {
    let known = |set: &ConceptSet| -> ConceptSet {
        set.iter().filter(|id| onto.contains(id)).cloned().collect()
    };
    let profile_concepts = known(&profile.concepts);
    let item_concepts: ConceptSet = item
        .concepts
        .iter()
        .filter(|id| onto.contains(id))
        .cloned()
        .collect();

    let expand_known = |set: &ConceptSet| {
        expand(onto, set, None, params.lambda).expect("concepts filtered to known ids")
    };
    let semantic = semrel(
        &expand_known(&profile_concepts),
        &expand_known(&item_concepts),
    );
    let textual = tfidf_cosine(&profile.term_weights, item_vector);
    let blended = params.alpha * textual + (1.0 - params.alpha) * semantic;
    (boost_factor(ctx, item) * blended).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::TermWeightVector;
    use std::collections::BTreeSet;

    fn set(ids: &[&str]) -> ConceptSet {
        ids.iter().copied().collect()
    }

    fn weighted(entries: &[(&str, f64)]) -> WeightedConceptVector {
        entries.iter().map(|(c, w)| ((*c).to_owned(), *w)).collect()
    }

    fn term_vec(entries: &[(&str, f64)]) -> TermWeightVector {
        entries.iter().map(|(t, w)| ((*t).to_owned(), *w)).collect()
    }

    #[test]
    fn equivalence_is_an_indicator() {
        assert_eq!(
            concept_equivalence(&set(&["Banana"]), &set(&["Banana", "Juice"])),
            1.0
        );
        assert_eq!(
            concept_equivalence(&set(&["Banana"]), &set(&["Juice"])),
            0.0
        );
        assert_eq!(concept_equivalence(&set(&[]), &set(&["Juice"])), 0.0);
    }

    #[test]
    fn binary_cosine_paper_divides_by_product() {
        let u = set(&["a", "b"]);
        let a = set(&["b", "c"]);
        assert_eq!(binary_cosine(&u, &a, BinaryCosineVariant::Paper), 0.25);
        assert_eq!(binary_cosine(&u, &a, BinaryCosineVariant::Standard), 0.5);
    }

    #[test]
    fn binary_cosine_identity_singleton() {
        let c = set(&["c"]);
        assert_eq!(binary_cosine(&c, &c, BinaryCosineVariant::Paper), 1.0);
        assert_eq!(binary_cosine(&c, &c, BinaryCosineVariant::Standard), 1.0);
    }

    #[test]
    fn binary_cosine_disjoint_and_empty_are_zero() {
        assert_eq!(
            binary_cosine(&set(&["a"]), &set(&["b"]), BinaryCosineVariant::Paper),
            0.0
        );
        assert_eq!(
            binary_cosine(&set(&[]), &set(&["b"]), BinaryCosineVariant::Paper),
            0.0
        );
    }

    #[test]
    fn jaccard_examples() {
        assert!((jaccard(&set(&["a", "b"]), &set(&["b", "c"])) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard(&set(&["a"]), &set(&["b"])), 0.0);
        assert_eq!(jaccard(&set(&[]), &set(&[])), 0.0);
    }

    #[test]
    fn expand_decays_neighbors() {
        let onto = crate::ontology::tests::fruit_ontology();
        // Frozen from hand expansion over the two-edge graph: Fruit keeps
        // weight 1.0, its neighbors Juice and Banana get 0.5.
        let vector = expand(&onto, &set(&["Fruit"]), None, 0.5).unwrap();
        assert_eq!(
            vector,
            weighted(&[("Fruit", 1.0), ("Juice", 0.5), ("Banana", 0.5)])
        );
    }

    #[test]
    fn expand_with_zero_lambda_keeps_members_only() {
        let onto = crate::ontology::tests::fruit_ontology();
        let vector = expand(&onto, &set(&["Fruit"]), None, 0.0).unwrap();
        assert_eq!(vector, weighted(&[("Fruit", 1.0)]));
    }

    #[test]
    fn expand_of_empty_set_is_empty() {
        let onto = crate::ontology::tests::fruit_ontology();
        assert!(expand(&onto, &set(&[]), None, 0.5).unwrap().is_empty());
    }

    #[test]
    fn expand_rejects_unknown_concept() {
        let onto = crate::ontology::tests::fruit_ontology();
        assert!(expand(&onto, &set(&["Ghost"]), None, 0.5).is_err());
    }

    #[test]
    fn expand_takes_maximum_on_overlap() {
        let onto = crate::ontology::tests::fruit_ontology();
        // Banana and Juice both reach Fruit as a neighbor; Fruit is not a
        // member, so it gets the larger decayed base weight.
        let bases = BTreeMap::from([("Banana".to_owned(), 0.8), ("Juice".to_owned(), 0.4)]);
        let vector = expand(&onto, &set(&["Banana", "Juice"]), Some(&bases), 0.5).unwrap();
        assert!((vector.get("Fruit") - 0.4).abs() < 1e-12);
        assert!((vector.get("Banana") - 0.8).abs() < 1e-12);
    }

    #[test]
    fn semrel_identity_and_orthogonality() {
        let v = weighted(&[("c1", 1.0), ("c2", 2.0)]);
        assert!((semrel(&v, &v) - 1.0).abs() < 1e-12);
        let w = weighted(&[("c3", 1.0)]);
        assert_eq!(semrel(&v, &w), 0.0);
        assert_eq!(semrel(&v, &WeightedConceptVector::new()), 0.0);
    }

    #[test]
    fn semrel_half_overlap_is_half() {
        let v_i = weighted(&[("c1", 1.0), ("c2", 1.0)]);
        let v_j = weighted(&[("c1", 1.0), ("c3", 1.0)]);
        assert!((semrel(&v_i, &v_j) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tfidf_cosine_identity_orthogonality_scale() {
        let v = term_vec(&[("a", 3.0), ("b", 4.0)]);
        assert!((tfidf_cosine(&v, &v) - 1.0).abs() < 1e-12);
        assert_eq!(tfidf_cosine(&v, &term_vec(&[("c", 1.0)])), 0.0);
        let scaled = v.scaled(10.0);
        assert!((tfidf_cosine(&v, &scaled) - 1.0).abs() < 1e-12);
    }

    fn bare_profile(concepts: &[&str], terms: &[(&str, f64)]) -> UserProfile {
        UserProfile {
            user_id: "u".into(),
            term_weights: term_vec(terms),
            concepts: concepts.iter().copied().collect(),
        }
    }

    fn bare_item(concepts: &[&str], tags: &[&str]) -> FoodItem {
        FoodItem {
            id: "x".into(),
            group: "G".into(),
            name: "x".into(),
            description: String::new(),
            tags: tags.iter().map(|t| (*t).to_owned()).collect(),
            concepts: concepts.iter().map(|c| (*c).to_owned()).collect(),
        }
    }

    #[test]
    fn proposed_reduces_to_tfidf_cosine() {
        let onto = Ontology::default();
        let profile = bare_profile(&[], &[("a", 1.0), ("b", 2.0)]);
        let item_vec = term_vec(&[("a", 2.0), ("c", 1.0)]);
        let params = BlendParams {
            alpha: 1.0,
            lambda: 0.5,
        };
        let score = proposed_score(
            &profile,
            &bare_item(&[], &[]),
            &item_vec,
            &onto,
            &BoostContext::empty(),
            &params,
        );
        assert!((score - tfidf_cosine(&profile.term_weights, &item_vec)).abs() < 1e-12);
    }

    #[test]
    fn proposed_identical_concepts_alpha_zero_is_one() {
        let onto = crate::ontology::tests::fruit_ontology();
        let profile = bare_profile(&["Banana", "Juice"], &[]);
        let item = bare_item(&["Banana", "Juice"], &[]);
        let params = BlendParams {
            alpha: 0.0,
            lambda: 0.5,
        };
        let score = proposed_score(
            &profile,
            &item,
            &TermWeightVector::new(),
            &onto,
            &BoostContext::empty(),
            &params,
        );
        assert!((score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn proposed_applies_boost_below_clamp() {
        // A blended score of 0.4 boosted by 1.5 lands on 0.6.
        let onto = crate::ontology::tests::fruit_ontology();
        let profile = bare_profile(&["Banana"], &[]);
        let item = bare_item(&["Banana"], &["hot"]);
        let params = BlendParams {
            alpha: 0.6, // semantic side contributes 0.4 * semrel
            lambda: 0.0,
        };
        let rules = vec![crate::heuristics::HeuristicRule {
            id: "r".into(),
            trigger_terms: BTreeSet::from(["q".to_owned()]),
            boosted_tags: BTreeSet::from(["hot".to_owned()]),
            boost: 1.5,
        }];
        let ctx = crate::heuristics::activate(
            &rules,
            &crate::textpipe::TermList::new(vec!["q".into()]),
            crate::heuristics::DEFAULT_BOOST_CAP,
        );
        // tfidf side is 0 (empty profile vector), semrel side is 1.
        let score = proposed_score(
            &profile,
            &item,
            &TermWeightVector::new(),
            &onto,
            &ctx,
            &params,
        );
        assert!((score - 0.6).abs() < 1e-12, "{score}");
    }

    #[test]
    fn proposed_clamps_to_one() {
        let onto = crate::ontology::tests::fruit_ontology();
        let profile = bare_profile(&["Banana"], &[]);
        let item = bare_item(&["Banana"], &["hot"]);
        let params = BlendParams {
            alpha: 0.0,
            lambda: 0.5,
        };
        let rules = vec![crate::heuristics::HeuristicRule {
            id: "r".into(),
            trigger_terms: BTreeSet::from(["q".to_owned()]),
            boosted_tags: BTreeSet::from(["hot".to_owned()]),
            boost: 1.5,
        }];
        let ctx = crate::heuristics::activate(
            &rules,
            &crate::textpipe::TermList::new(vec!["q".into()]),
            crate::heuristics::DEFAULT_BOOST_CAP,
        );
        let score = proposed_score(
            &profile,
            &item,
            &TermWeightVector::new(),
            &onto,
            &ctx,
            &params,
        );
        assert_eq!(score, 1.0);
    }

    #[test]
    fn proposed_core_is_symmetric_without_boost() {
        // Swapping the profile side and the item side leaves the no-boost
        // blend unchanged.
        let onto = crate::ontology::tests::fruit_ontology();
        let params = BlendParams::default();
        let side_a = (vec!["Banana"], term_vec(&[("oat", 0.4), ("warm", 0.1)]));
        let side_b = (
            vec!["Banana", "Juice"],
            term_vec(&[("oat", 0.2), ("milk", 0.3)]),
        );
        let score = |left: &(Vec<&str>, TermWeightVector),
                     right: &(Vec<&str>, TermWeightVector)| {
            let profile = bare_profile(&left.0, &[]);
            let profile = UserProfile {
                term_weights: left.1.clone(),
                ..profile
            };
            let item = bare_item(&right.0, &[]);
            proposed_score(
                &profile,
                &item,
                &right.1,
                &onto,
                &BoostContext::empty(),
                &params,
            )
        };
        let forward = score(&side_a, &side_b);
        let backward = score(&side_b, &side_a);
        assert!((forward - backward).abs() < 1e-12);
        assert!(forward > 0.0);
    }

    #[test]
    fn measure_names_round_trip() {
        for measure in MeasureKind::ALL {
            assert_eq!(measure.name().parse::<MeasureKind>().unwrap(), measure);
        }
        assert!("nonsense".parse::<MeasureKind>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_set() -> impl Strategy<Value = ConceptSet> {
            proptest::collection::btree_set("[a-f]", 0..6).prop_map(|s| s.into_iter().collect())
        }

        fn arb_weighted() -> impl Strategy<Value = WeightedConceptVector> {
            proptest::collection::btree_map("[a-f]", 0.01f64..5.0, 0..6)
                .prop_map(WeightedConceptVector::from_weights)
        }

        proptest! {
            #[test]
            fn set_measures_are_symmetric(u in arb_set(), a in arb_set()) {
                prop_assert_eq!(concept_equivalence(&u, &a), concept_equivalence(&a, &u));
                prop_assert_eq!(jaccard(&u, &a), jaccard(&a, &u));
                for variant in [BinaryCosineVariant::Paper, BinaryCosineVariant::Standard] {
                    prop_assert_eq!(binary_cosine(&u, &a, variant), binary_cosine(&a, &u, variant));
                }
            }

            #[test]
            fn set_measures_stay_in_range(u in arb_set(), a in arb_set()) {
                for value in [
                    concept_equivalence(&u, &a),
                    jaccard(&u, &a),
                    binary_cosine(&u, &a, BinaryCosineVariant::Paper),
                ] {
                    prop_assert!((0.0..=1.0).contains(&value), "{}", value);
                }
            }

            #[test]
            fn equivalence_dominates_ratio_measures(u in arb_set(), a in arb_set()) {
                let eq = concept_equivalence(&u, &a);
                prop_assert!(eq >= jaccard(&u, &a));
                prop_assert!(eq >= binary_cosine(&u, &a, BinaryCosineVariant::Paper));
            }

            #[test]
            fn jaccard_is_one_iff_equal_nonempty(u in arb_set(), a in arb_set()) {
                if jaccard(&u, &a) == 1.0 {
                    prop_assert_eq!(&u, &a);
                    prop_assert!(!u.is_empty());
                } else if !u.is_empty() && u == a {
                    prop_assert!(false, "equal nonempty sets must score 1");
                }
            }

            #[test]
            fn semrel_is_symmetric_and_bounded(v in arb_weighted(), w in arb_weighted()) {
                let forward = semrel(&v, &w);
                let backward = semrel(&w, &v);
                prop_assert!((forward - backward).abs() < 1e-12);
                prop_assert!((0.0..=1.0 + 1e-12).contains(&forward));
            }

            #[test]
            fn semrel_scale_invariant(v in arb_weighted(), w in arb_weighted(), k in 0.01f64..100.0) {
                let scaled: WeightedConceptVector =
                    v.iter().map(|(c, x)| (c.clone(), x * k)).collect();
                let base = semrel(&v, &w);
                let after = semrel(&scaled, &w);
                prop_assert!((base - after).abs() < 1e-12);
            }
        }
    }
}
