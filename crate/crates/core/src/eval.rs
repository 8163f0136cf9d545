//! Evaluation bench: per-user train/test split, confusion matrices, the
//! five report metrics per (user, measure), cutoff sweeps and report
//! emission.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{split_train_test, Corpus, CorpusError, RatingSet, SplitSpec};
use crate::heuristics::{activate, BoostContext, HeuristicRule, DEFAULT_BOOST_CAP};
use crate::ontology::Ontology;
use crate::profile::{build_profile, IdfScope, ProfileError, TfIdfModel};
use crate::recommender::{recommend, RecommenderConfig, ScoreError, DEFAULT_CUTOFF};
use crate::similarity::{BinaryCosineVariant, BlendParams, MeasureKind};
use crate::textpipe::{Pipeline, TermList};

/// User column value that flags a per-measure average row.
pub const AVERAGE_USER: &str = "average";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("metrics of an all-zero confusion matrix are undefined")]
    AllZeroMatrix,
    #[error("no user has a relevant training item; nothing to evaluate")]
    NoValidUsers,
    #[error("report is empty")]
    EmptyReport,
    #[error("cutoff grid must be non-empty with values in [0, 1]")]
    BadGrid,
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// TP/FP/FN/TN counts over one user's test set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl ConfusionMatrix {
    pub fn new(true_pos: usize, false_pos: usize, false_neg: usize, true_neg: usize) -> Self {
        ConfusionMatrix {
            true_pos,
            false_pos,
            false_neg,
            true_neg,
        }
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

/// Compare recommendations against relevance judgments over the test set.
/// Both input sets must be subsets of the test items.
pub fn confusion(
    recommended: &BTreeSet<String>,
    relevant: &BTreeSet<String>,
    test_items: &BTreeSet<String>,
) -> Result<ConfusionMatrix, EvalError> {
    if !recommended.is_subset(test_items) {
        return Err(EvalError::Protocol(
            "recommended items are not a subset of the test set".to_owned(),
        ));
    }
    if !relevant.is_subset(test_items) {
        return Err(EvalError::Protocol(
            "relevant items are not a subset of the test set".to_owned(),
        ));
    }
    let true_pos = recommended.intersection(relevant).count();
    let false_pos = recommended.len() - true_pos;
    let false_neg = relevant.len() - true_pos;
    let true_neg = test_items.len() - recommended.union(relevant).count();
    Ok(ConfusionMatrix {
        true_pos,
        false_pos,
        false_neg,
        true_neg,
    })
}

/// The five report metrics. A `None` marks an undefined value (zero
/// denominator), which averaging skips rather than treating as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub f_measure: Option<f64>,
}

/// Harmonic mean of precision and recall; undefined when both are zero.
pub fn f_measure(precision: f64, recall: f64) -> Option<f64> {
    if precision + recall > 0.0 {
        Some(2.0 * precision * recall / (precision + recall))
    } else {
        None
    }
}

/// Derive the metrics of one confusion matrix.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::AllZeroMatrix);
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let precision = ratio(cm.true_pos, cm.true_pos + cm.false_pos);
    let recall = ratio(cm.true_pos, cm.true_pos + cm.false_neg);
    let f = match (precision, recall) {
        (Some(p), Some(r)) => f_measure(p, r),
        _ => None,
    };
    Ok(Metrics {
        accuracy: (cm.true_pos + cm.true_neg) as f64 / total as f64,
        precision,
        recall,
        specificity: ratio(cm.true_neg, cm.true_neg + cm.false_pos),
        f_measure: f,
    })
}

/// One report row: metrics for a (user, measure) cell or a per-measure
/// average flagged with [`AVERAGE_USER`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub user_id: String,
    pub measure: MeasureKind,
    pub cutoff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
    pub metrics: Metrics,
}

/// A user skipped by the protocol, with the reason recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedUser {
    pub user_id: String,
    pub reason: String,
}

/// Everything evaluate_all produces, including instrumentation used by the
/// test suites: the split, the per-profile source items and the raw
/// recommendation sets.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub rows: Vec<EvalRow>,
    pub averages: Vec<EvalRow>,
    pub skipped: Vec<SkippedUser>,
    pub train_ids: BTreeSet<String>,
    pub test_ids: BTreeSet<String>,
    pub profile_items: BTreeMap<String, BTreeSet<String>>,
    pub recommendations: BTreeMap<(String, MeasureKind), BTreeSet<String>>,
}

impl EvalOutcome {
    /// Per-user rows followed by the flagged average rows.
    pub fn all_rows(&self) -> Vec<EvalRow> {
        self.rows
            .iter()
            .chain(self.averages.iter())
            .cloned()
            .collect()
    }
}

/// Full protocol configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub split: SplitSpec,
    pub measures: Vec<MeasureKind>,
    /// Per-measure cutoffs; measures not in the map use [`DEFAULT_CUTOFF`].
    pub cutoffs: BTreeMap<MeasureKind, f64>,
    pub blend: BlendParams,
    pub bcosine_variant: BinaryCosineVariant,
    pub idf_scope: IdfScope,
    pub heuristics_enabled: bool,
    pub boost_cap: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            split: SplitSpec::default(),
            measures: MeasureKind::ALL.to_vec(),
            cutoffs: BTreeMap::new(),
            blend: BlendParams::default(),
            bcosine_variant: BinaryCosineVariant::default(),
            idf_scope: IdfScope::default(),
            heuristics_enabled: true,
            boost_cap: DEFAULT_BOOST_CAP,
        }
    }
}

impl EvalConfig {
    pub fn cutoff_for(&self, measure: MeasureKind) -> f64 {
        self.cutoffs
            .get(&measure)
            .copied()
            .unwrap_or(DEFAULT_CUTOFF)
    }
}

fn macro_average(rows: &[&EvalRow], measure: MeasureKind, cutoff: f64) -> EvalRow {
    let mean_opt = |pick: fn(&Metrics) -> Option<f64>| {
        let values: Vec<f64> = rows.iter().filter_map(|r| pick(&r.metrics)).collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    };
    let accuracy = rows.iter().map(|r| r.metrics.accuracy).sum::<f64>() / rows.len() as f64;
    EvalRow {
        user_id: AVERAGE_USER.to_owned(),
        measure,
        cutoff,
        confusion: None,
        metrics: Metrics {
            accuracy,
            precision: mean_opt(|m| m.precision),
            recall: mean_opt(|m| m.recall),
            specificity: mean_opt(|m| m.specificity),
            f_measure: mean_opt(|m| m.f_measure),
        },
    }
}

/// Run the whole protocol: split once, then for every user build a profile
/// from the relevant training items and score the test set under every
/// measure. Users without a relevant training item are skipped and
/// recorded. Macro-averages across users are appended per measure.
pub fn evaluate_all(
    corpus: &Corpus,
    users: &[RatingSet],
    onto: &Ontology,
    rules: &[HeuristicRule],
    pipeline: &Pipeline,
    cfg: &EvalConfig,
) -> Result<EvalOutcome, EvalError> {
    for user in users {
        user.validate_against(corpus)?;
    }

    let mut annotated = corpus.clone();
    onto.annotate_corpus(pipeline, &mut annotated);
    let (train, test) = split_train_test(&annotated, &cfg.split)?;
    let train_ids = train.ids();
    let test_ids = test.ids();
    debug_assert!(train_ids.is_disjoint(&test_ids));

    let df_scope = match cfg.idf_scope {
        IdfScope::Full => None,
        IdfScope::Train => Some(&train_ids),
    };
    let model = TfIdfModel::build_scoped(&annotated, pipeline, df_scope);

    let mut outcome = EvalOutcome {
        rows: Vec::new(),
        averages: Vec::new(),
        skipped: Vec::new(),
        train_ids: train_ids.clone(),
        test_ids: test_ids.clone(),
        profile_items: BTreeMap::new(),
        recommendations: BTreeMap::new(),
    };

    for user in users {
        let relevant_train: BTreeSet<String> =
            user.relevant.intersection(&train_ids).cloned().collect();
        if relevant_train.is_empty() {
            outcome.skipped.push(SkippedUser {
                user_id: user.user_id.clone(),
                reason: "no relevant training items after the split (cold start)".to_owned(),
            });
            continue;
        }
        let profile = build_profile(
            &user.user_id,
            &user.relevant,
            &train,
            onto,
            pipeline,
            &model,
        )?;
        outcome
            .profile_items
            .insert(user.user_id.clone(), relevant_train);

        let ctx = if cfg.heuristics_enabled {
            let profile_terms = TermList::new(profile.term_weights.terms().cloned().collect());
            activate(rules, &profile_terms, cfg.boost_cap)
        } else {
            BoostContext::empty()
        };

        let relevant_test: BTreeSet<String> =
            user.relevant.intersection(&test_ids).cloned().collect();
        for &measure in &cfg.measures {
            let rcfg = RecommenderConfig {
                measure,
                cutoff: cfg.cutoff_for(measure),
                top_k: None,
                blend: cfg.blend,
                bcosine_variant: cfg.bcosine_variant,
            };
            let recs = recommend(&profile, &test, &model, Some(onto), &ctx, &rcfg)?;
            let recommended: BTreeSet<String> = recs.into_iter().map(|r| r.item_id).collect();
            let cm = confusion(&recommended, &relevant_test, &test_ids)?;
            outcome.rows.push(EvalRow {
                user_id: user.user_id.clone(),
                measure,
                cutoff: rcfg.cutoff,
                confusion: Some(cm),
                metrics: metrics(&cm)?,
            });
            outcome
                .recommendations
                .insert((user.user_id.clone(), measure), recommended);
        }
    }

    if outcome.rows.is_empty() {
        return Err(EvalError::NoValidUsers);
    }

    for &measure in &cfg.measures {
        let rows: Vec<&EvalRow> = outcome
            .rows
            .iter()
            .filter(|r| r.measure == measure)
            .collect();
        if !rows.is_empty() {
            outcome
                .averages
                .push(macro_average(&rows, measure, cfg.cutoff_for(measure)));
        }
    }

    Ok(outcome)
}

/// Repeat the evaluation over a cutoff grid (applied to every measure).
/// Asserts the built-in invariant that recommendation sets only shrink as
/// the cutoff rises.
pub fn sweep_cutoff(
    corpus: &Corpus,
    users: &[RatingSet],
    onto: &Ontology,
    rules: &[HeuristicRule],
    pipeline: &Pipeline,
    cfg: &EvalConfig,
    grid: &[f64],
) -> Result<Vec<(f64, EvalOutcome)>, EvalError> {
    if grid.is_empty() || grid.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(EvalError::BadGrid);
    }
    let mut cutoffs: Vec<f64> = grid.to_vec();
    cutoffs.sort_by(f64::total_cmp);
    cutoffs.dedup();

    let mut sweeps = Vec::new();
    for &cutoff in &cutoffs {
        let mut point_cfg = cfg.clone();
        point_cfg.cutoffs = cfg.measures.iter().map(|&m| (m, cutoff)).collect();
        let outcome = evaluate_all(corpus, users, onto, rules, pipeline, &point_cfg)?;
        if let Some((_, previous)) = sweeps.last() {
            let previous: &EvalOutcome = previous;
            for (key, recs) in &outcome.recommendations {
                if let Some(before) = previous.recommendations.get(key) {
                    assert!(
                        recs.is_subset(before),
                        "recommendation set grew when the cutoff rose (user {}, measure {})",
                        key.0,
                        key.1
                    );
                }
            }
        }
        sweeps.push((cutoff, outcome));
    }
    Ok(sweeps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

const REPORT_HEADER: [&str; 8] = [
    "user",
    "measure",
    "cutoff",
    "accuracy",
    "precision",
    "recall",
    "specificity",
    "f_measure",
];

fn fmt_cell(value: Option<f64>) -> String {
    value.map_or(String::new(), |v| format!("{v:.6}"))
}

/// Render rows to CSV (undefined metrics become empty cells) or JSON.
pub fn render_report(rows: &[EvalRow], format: ReportFormat) -> Result<String, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::EmptyReport);
    }
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(rows).expect("rows serialize")),
        ReportFormat::Csv => {
            let mut out = REPORT_HEADER.join(",");
            out.push('\n');
            for row in rows {
                let m = &row.metrics;
                out.push_str(&format!(
                    "{},{},{:.6},{},{},{},{},{}\n",
                    row.user_id,
                    row.measure,
                    row.cutoff,
                    fmt_cell(Some(m.accuracy)),
                    fmt_cell(m.precision),
                    fmt_cell(m.recall),
                    fmt_cell(m.specificity),
                    fmt_cell(m.f_measure),
                ));
            }
            Ok(out)
        }
    }
}

/// Write the rendered report to a file.
pub fn emit_report(rows: &[EvalRow], path: &Path, format: ReportFormat) -> Result<(), EvalError> {
    let text = render_report(rows, format)?;
    std::fs::write(path, text).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}
