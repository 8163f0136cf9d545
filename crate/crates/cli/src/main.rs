//! foodrec: ingest a food corpus, build profiles, rank recommendations and
//! run the evaluation bench from the command line.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use foodrec::corpus::{self, CorpusFormat, SplitSpec};
use foodrec::eval::{self, EvalConfig, ReportFormat};
use foodrec::heuristics::{self, BoostContext, HeuristicRule, DEFAULT_BOOST_CAP};
use foodrec::ontology::load_ontology;
use foodrec::profile::{build_profile, IdfScope, TfIdfModel, UserProfile};
use foodrec::recommender::{recommend, RecommenderConfig, DEFAULT_CUTOFF};
use foodrec::similarity::{BinaryCosineVariant, BlendParams, MeasureKind};
use foodrec::textpipe::Pipeline;

/// Environment variable holding a default rules path.
const RULES_ENV: &str = "FOODREC_RULES";

#[derive(Parser, Debug)]
#[command(
    name = "foodrec",
    about = "Food recommender and evaluation bench",
    version,
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    /// Optional key=value config file; explicit flags win over its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load, validate and annotate a corpus, then write it as JSON.
    Ingest(IngestArgs),
    /// Rank items for a user profile or an ad-hoc query.
    Recommend(RecommendArgs),
    /// Run the full evaluation protocol and emit a report.
    Evaluate(EvaluateArgs),
    /// Repeat the evaluation over a cutoff grid.
    Sweep(SweepArgs),
    /// Generate a synthetic corpus, ratings, ontology and rules.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct CommonScoring {
    /// Ontology JSON path (required by concept measures).
    #[arg(long)]
    onto: Option<PathBuf>,
    /// Heuristic rules JSON path; FOODREC_RULES or the bundled default
    /// when omitted.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Disable heuristic boosting entirely.
    #[arg(long)]
    no_heuristics: bool,
    /// Blend weight for the proposed measure.
    #[arg(long)]
    alpha: Option<f64>,
    /// Neighborhood decay for semantic relatedness.
    #[arg(long)]
    lambda: Option<f64>,
    /// Binary cosine denominator: paper or standard.
    #[arg(long)]
    bcosine_variant: Option<String>,
    /// Cap on the combined heuristic boost.
    #[arg(long)]
    boost_cap: Option<f64>,
    /// Stop-list file overriding the bundled list.
    #[arg(long)]
    stop_list: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Corpus CSV or JSON path.
    #[arg(long)]
    corpus: PathBuf,
    /// Ontology used for annotation.
    #[arg(long)]
    onto: PathBuf,
    /// Output path for the annotated corpus (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Stop-list file overriding the bundled list.
    #[arg(long)]
    stop_list: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RecommendArgs {
    /// Corpus CSV or JSON path.
    #[arg(long)]
    corpus: PathBuf,
    /// Ratings JSON path (needed with --user).
    #[arg(long)]
    ratings: Option<PathBuf>,
    /// Build the profile from this user's relevant items.
    #[arg(long)]
    user: Option<String>,
    /// Free-text query; forms the profile when no user is given and
    /// triggers heuristic rules.
    #[arg(long)]
    query: Option<String>,
    /// Similarity measure.
    #[arg(long)]
    measure: Option<String>,
    /// Recommendation threshold (strictly-greater filter).
    #[arg(long)]
    cutoff: Option<f64>,
    /// Keep only the best k items.
    #[arg(long)]
    top_k: Option<usize>,
    /// Output format: jsonl or table.
    #[arg(long)]
    format: Option<String>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Export the profile used for scoring as JSON.
    #[arg(long)]
    save_profile: Option<PathBuf>,
    #[command(flatten)]
    scoring: CommonScoring,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Corpus CSV or JSON path.
    #[arg(long)]
    corpus: PathBuf,
    /// Ratings JSON path.
    #[arg(long)]
    ratings: PathBuf,
    /// Measures to evaluate: names, comma lists, or "all".
    #[arg(long, value_delimiter = ',')]
    measure: Vec<String>,
    /// Train fraction of the split.
    #[arg(long)]
    split: Option<f64>,
    /// Seed for the shuffle.
    #[arg(long)]
    seed: Option<u64>,
    /// Shuffle and cut within each food group.
    #[arg(long)]
    stratify: bool,
    /// Cutoff applied to every measure.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Document-frequency scope: full or train.
    #[arg(long)]
    idf_scope: Option<String>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: csv or json.
    #[arg(long)]
    format: Option<String>,
    #[command(flatten)]
    scoring: CommonScoring,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    evaluate: EvaluateArgs,
    /// Comma-separated cutoff grid.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Directory receiving corpus, ratings, ontology and rules files.
    #[arg(long)]
    out_dir: PathBuf,
    /// Number of items, spread over the 24 standard groups.
    #[arg(long)]
    items: Option<usize>,
    /// Number of synthetic users (at most 5 defaults are defined).
    #[arg(long)]
    users: Option<usize>,
    /// Generation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Corpus format: csv or json.
    #[arg(long)]
    format: Option<String>,
}

/// key=value config file; a '#' starts a comment line.
#[derive(Debug, Default)]
struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("failed to read config {}", path.display()))?;
        let mut map = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), idx + 1))?;
            map.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        Ok(FileConfig(map))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|e| anyhow!("config key {key}={raw}: {e}"))
            })
            .transpose()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let io_error = err.chain().any(|c| c.is::<std::io::Error>());
            ExitCode::from(if io_error { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(args) => run_ingest(args, &config),
        Command::Recommend(args) => run_recommend(args, &config),
        Command::Evaluate(args) => {
            let report = run_evaluate(&args, &config)?;
            write_or_print(args.out.as_deref(), &report)
        }
        Command::Sweep(args) => run_sweep(args, &config),
        Command::Gen(args) => run_gen(args, &config),
    }
}

fn detect_format(path: &Path) -> CorpusFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => CorpusFormat::Json,
        _ => CorpusFormat::Csv,
    }
}

fn pipeline_from(stop_list: Option<&Path>, config: &FileConfig) -> Result<Pipeline> {
    let path = stop_list
        .map(Path::to_path_buf)
        .or_else(|| config.get("stop-list").map(PathBuf::from));
    match path {
        Some(path) => Ok(Pipeline::from_stoplist_file(&path)?),
        None => Ok(Pipeline::new()),
    }
}

fn load_rules_from(
    flag: Option<&Path>,
    config: &FileConfig,
    disabled: bool,
) -> Result<Vec<HeuristicRule>> {
    if disabled {
        return Ok(Vec::new());
    }
    let path = flag
        .map(Path::to_path_buf)
        .or_else(|| config.get("rules").map(PathBuf::from))
        .or_else(|| std::env::var(RULES_ENV).ok().map(PathBuf::from));
    match path {
        Some(path) => Ok(heuristics::load_rules(&path)?),
        None => Ok(heuristics::default_rules()),
    }
}

fn parse_measures(raw: &[String], config: &FileConfig) -> Result<Vec<MeasureKind>> {
    let mut names: Vec<String> = raw.to_vec();
    if names.is_empty() {
        if let Some(from_config) = config.get("measure") {
            names = from_config.split(',').map(str::to_owned).collect();
        }
    }
    if names.is_empty() || names.iter().any(|n| n == "all") {
        return Ok(MeasureKind::ALL.to_vec());
    }
    let mut measures = Vec::new();
    for name in names {
        let measure = name.parse::<MeasureKind>().map_err(|e| anyhow!(e))?;
        if !measures.contains(&measure) {
            measures.push(measure);
        }
    }
    Ok(measures)
}

struct ScoringSetup {
    blend: BlendParams,
    bcosine_variant: BinaryCosineVariant,
    boost_cap: f64,
    rules: Vec<HeuristicRule>,
    pipeline: Pipeline,
    heuristics_enabled: bool,
}

fn scoring_setup(scoring: &CommonScoring, config: &FileConfig) -> Result<ScoringSetup> {
    let defaults = BlendParams::default();
    let alpha = scoring
        .alpha
        .or(config.parse("alpha")?)
        .unwrap_or(defaults.alpha);
    let lambda = scoring
        .lambda
        .or(config.parse("lambda")?)
        .unwrap_or(defaults.lambda);
    for (name, value) in [("alpha", alpha), ("lambda", lambda)] {
        if !(0.0..=1.0).contains(&value) {
            bail!("{name} {value} is outside [0, 1]");
        }
    }
    let variant = match scoring
        .bcosine_variant
        .as_deref()
        .or(config.get("bcosine-variant"))
    {
        Some(raw) => raw.parse::<BinaryCosineVariant>().map_err(|e| anyhow!(e))?,
        None => BinaryCosineVariant::default(),
    };
    let boost_cap = scoring
        .boost_cap
        .or(config.parse("boost-cap")?)
        .unwrap_or(DEFAULT_BOOST_CAP);
    if boost_cap < 1.0 {
        bail!("boost cap {boost_cap} must be at least 1.0");
    }
    Ok(ScoringSetup {
        blend: BlendParams { alpha, lambda },
        bcosine_variant: variant,
        boost_cap,
        rules: load_rules_from(scoring.rules.as_deref(), config, scoring.no_heuristics)?,
        pipeline: pipeline_from(scoring.stop_list.as_deref(), config)?,
        heuristics_enabled: !scoring.no_heuristics,
    })
}

fn run_ingest(args: IngestArgs, config: &FileConfig) -> Result<()> {
    let pipeline = pipeline_from(args.stop_list.as_deref(), config)?;
    let mut corpus = corpus::load_corpus(&args.corpus, detect_format(&args.corpus))?;
    let onto = load_ontology(&args.onto)?;
    onto.annotate_corpus(&pipeline, &mut corpus);
    corpus::write_corpus_json(&corpus, &args.out)?;
    let annotated = corpus.iter().filter(|i| !i.concepts.is_empty()).count();
    println!(
        "ingested {} items ({} annotated) -> {}",
        corpus.len(),
        annotated,
        args.out.display()
    );
    Ok(())
}

fn run_recommend(args: RecommendArgs, config: &FileConfig) -> Result<()> {
    let setup = scoring_setup(&args.scoring, config)?;
    let mut corpus = corpus::load_corpus(&args.corpus, detect_format(&args.corpus))?;
    let onto = match &args.scoring.onto {
        Some(path) => Some(load_ontology(path)?),
        None => config
            .get("onto")
            .map(|p| load_ontology(Path::new(p)))
            .transpose()?,
    };
    if let Some(onto) = &onto {
        onto.annotate_corpus(&setup.pipeline, &mut corpus);
    }
    let model = TfIdfModel::build(&corpus, &setup.pipeline);

    let measure = match args.measure.as_deref().or(config.get("measure")) {
        Some(raw) => raw.parse::<MeasureKind>().map_err(|e| anyhow!(e))?,
        None => MeasureKind::Proposed,
    };
    let cutoff = args
        .cutoff
        .or(config.parse("cutoff")?)
        .unwrap_or(DEFAULT_CUTOFF);
    let cfg = RecommenderConfig {
        measure,
        cutoff,
        top_k: args.top_k,
        blend: setup.blend,
        bcosine_variant: setup.bcosine_variant,
    };

    // Profile from the rated user when given, else from the query text.
    let (profile, candidate_ids): (UserProfile, BTreeSet<String>) = match (&args.user, &args.query)
    {
        (Some(user_id), _) => {
            let ratings_path = args
                .ratings
                .as_deref()
                .ok_or_else(|| anyhow!("--user needs --ratings"))?;
            let ratings = corpus::load_ratings(ratings_path)?;
            let rating = ratings
                .iter()
                .find(|r| &r.user_id == user_id)
                .ok_or_else(|| anyhow!("user {user_id:?} not found in ratings"))?;
            rating.validate_against(&corpus)?;
            let onto_ref = onto.as_ref().cloned().unwrap_or_default();
            let profile = build_profile(
                user_id,
                &rating.relevant,
                &corpus,
                &onto_ref,
                &setup.pipeline,
                &model,
            )?;
            let candidates: BTreeSet<String> =
                corpus.ids().difference(&rating.relevant).cloned().collect();
            (profile, candidates)
        }
        (None, Some(query)) => {
            let terms = setup.pipeline.preprocess(query);
            let concepts = onto
                .as_ref()
                .map(|o| o.annotate_text(&setup.pipeline, query))
                .unwrap_or_default();
            let profile = UserProfile {
                user_id: "query".to_owned(),
                term_weights: model.vector_for_terms(&terms),
                concepts,
            };
            (profile, corpus.ids())
        }
        (None, None) => bail!("recommend needs --user or --query"),
    };

    let ctx = if setup.heuristics_enabled {
        let trigger_terms = match &args.query {
            Some(query) => setup.pipeline.preprocess(query),
            None => {
                foodrec::textpipe::TermList::new(profile.term_weights.terms().cloned().collect())
            }
        };
        heuristics::activate(&setup.rules, &trigger_terms, setup.boost_cap)
    } else {
        BoostContext::empty()
    };

    if let Some(path) = &args.save_profile {
        foodrec::profile::write_profile_json(&profile, path)?;
        eprintln!("profile written to {}", path.display());
    }

    let candidates = corpus.subset(&candidate_ids);
    let recs = recommend(&profile, &candidates, &model, onto.as_ref(), &ctx, &cfg)?;

    let mut out = String::new();
    match args.format.as_deref().unwrap_or("jsonl") {
        "jsonl" => {
            for rec in &recs {
                out.push_str(&serde_json::to_string(rec)?);
                out.push('\n');
            }
        }
        "table" => {
            out.push_str(&format!("{:<28} {:>10}  measure\n", "item_id", "score"));
            for rec in &recs {
                out.push_str(&format!(
                    "{:<28} {:>10.6}  {}\n",
                    rec.item_id, rec.score, rec.measure
                ));
            }
        }
        other => bail!("unknown format {other:?} (expected jsonl|table)"),
    }
    write_or_print(args.out.as_deref(), &out)
}

fn eval_config(
    args: &EvaluateArgs,
    config: &FileConfig,
    setup: &ScoringSetup,
) -> Result<EvalConfig> {
    let measures = parse_measures(&args.measure, config)?;
    let train_fraction = args.split.or(config.parse("split")?).unwrap_or(0.6);
    let seed = args.seed.or(config.parse("seed")?).unwrap_or(0);
    let stratify = args.stratify || config.parse::<bool>("stratify")?.unwrap_or(false);
    let cutoff = args.cutoff.or(config.parse("cutoff")?);
    let cutoffs: BTreeMap<MeasureKind, f64> = match cutoff {
        Some(c) => measures.iter().map(|&m| (m, c)).collect(),
        None => BTreeMap::new(),
    };
    let idf_scope = match args.idf_scope.as_deref().or(config.get("idf-scope")) {
        Some("train") => IdfScope::Train,
        Some("full") | None => IdfScope::Full,
        Some(other) => bail!("unknown idf scope {other:?} (expected train|full)"),
    };
    Ok(EvalConfig {
        split: SplitSpec {
            train_fraction,
            seed,
            stratify_by_group: stratify,
        },
        measures,
        cutoffs,
        blend: setup.blend,
        bcosine_variant: setup.bcosine_variant,
        idf_scope,
        heuristics_enabled: setup.heuristics_enabled,
        boost_cap: setup.boost_cap,
    })
}

fn report_format(raw: Option<&str>, out: Option<&Path>) -> Result<ReportFormat> {
    match raw {
        Some("csv") => Ok(ReportFormat::Csv),
        Some("json") => Ok(ReportFormat::Json),
        Some(other) => bail!("unknown report format {other:?} (expected csv|json)"),
        None => Ok(
            match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
                Some("json") => ReportFormat::Json,
                _ => ReportFormat::Csv,
            },
        ),
    }
}

fn run_evaluate(args: &EvaluateArgs, config: &FileConfig) -> Result<String> {
    let setup = scoring_setup(&args.scoring, config)?;
    let cfg = eval_config(args, config, &setup)?;
    let corpus = corpus::load_corpus(&args.corpus, detect_format(&args.corpus))?;
    let ratings = corpus::load_ratings(&args.ratings)?;
    let onto_path = args
        .scoring
        .onto
        .clone()
        .or_else(|| config.get("onto").map(PathBuf::from))
        .ok_or_else(|| anyhow!("evaluate needs --onto"))?;
    let onto = load_ontology(&onto_path)?;

    let outcome = eval::evaluate_all(
        &corpus,
        &ratings,
        &onto,
        &setup.rules,
        &setup.pipeline,
        &cfg,
    )?;
    for skipped in &outcome.skipped {
        eprintln!("skipped user {}: {}", skipped.user_id, skipped.reason);
    }
    let format = report_format(args.format.as_deref(), args.out.as_deref())?;
    Ok(eval::render_report(&outcome.all_rows(), format)?)
}

fn run_sweep(args: SweepArgs, config: &FileConfig) -> Result<()> {
    let setup = scoring_setup(&args.evaluate.scoring, config)?;
    let cfg = eval_config(&args.evaluate, config, &setup)?;
    let corpus = corpus::load_corpus(&args.evaluate.corpus, detect_format(&args.evaluate.corpus))?;
    let ratings = corpus::load_ratings(&args.evaluate.ratings)?;
    let onto_path = args
        .evaluate
        .scoring
        .onto
        .clone()
        .or_else(|| config.get("onto").map(PathBuf::from))
        .ok_or_else(|| anyhow!("sweep needs --onto"))?;
    let onto = load_ontology(&onto_path)?;

    let grid: Vec<f64> = if args.grid.is_empty() {
        (1..10).map(|i| f64::from(i) / 10.0).collect()
    } else {
        args.grid.clone()
    };
    let sweeps = eval::sweep_cutoff(
        &corpus,
        &ratings,
        &onto,
        &setup.rules,
        &setup.pipeline,
        &cfg,
        &grid,
    )?;
    let rows: Vec<eval::EvalRow> = sweeps
        .iter()
        .flat_map(|(_, outcome)| outcome.all_rows())
        .collect();
    let format = report_format(
        args.evaluate.format.as_deref(),
        args.evaluate.out.as_deref(),
    )?;
    let report = eval::render_report(&rows, format)?;
    write_or_print(args.evaluate.out.as_deref(), &report)
}

fn run_gen(args: GenArgs, config: &FileConfig) -> Result<()> {
    let seed = args.seed.or(config.parse("seed")?).unwrap_or(42);
    let items = args.items.or(config.parse("items")?).unwrap_or(300);
    let user_count = args.users.or(config.parse("users")?).unwrap_or(5);

    let groups = corpus::synth::default_groups();
    let base = items / groups.len();
    let extra = items % groups.len();
    let spec: Vec<(String, usize)> = groups
        .into_iter()
        .enumerate()
        .map(|(i, g)| (g, base + usize::from(i < extra)))
        .collect();
    let corpus = corpus::synth::generate_synthetic(&spec, seed);

    let mut users = corpus::synth::default_users();
    if user_count > users.len() {
        bail!("at most {} default users are defined", users.len());
    }
    users.truncate(user_count);
    let ratings = corpus::synth::generate_ratings(&corpus, &users);
    let onto = corpus::synth::synthetic_ontology();

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("failed to create {}", args.out_dir.display()))?;
    let corpus_path = match args.format.as_deref().or(config.get("format")) {
        Some("json") => {
            let path = args.out_dir.join("corpus.json");
            corpus::write_corpus_json(&corpus, &path)?;
            path
        }
        Some("csv") | None => {
            let path = args.out_dir.join("corpus.csv");
            corpus::write_corpus_csv(&corpus, &path)?;
            path
        }
        Some(other) => bail!("unknown corpus format {other:?} (expected csv|json)"),
    };
    let ratings_path = args.out_dir.join("ratings.json");
    corpus::write_ratings_json(&ratings, &ratings_path)?;
    let onto_path = args.out_dir.join("ontology.json");
    foodrec::ontology::write_ontology_json(&onto, &onto_path)?;
    let rules_path = args.out_dir.join("rules.json");
    let rules_text = serde_json::to_string_pretty(&heuristics::default_rules())?;
    std::fs::write(&rules_path, rules_text)
        .with_context(|| format!("failed to write {}", rules_path.display()))?;

    for path in [&corpus_path, &ratings_path, &onto_path, &rules_path] {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)
                .with_context(|| format!("failed to write {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
