//! Command-line surface: wires the pipeline stages into reproducible,
//! seed-deterministic subcommands behind a single configuration file.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/validation error.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::aggregate::{self, CooccurrenceBin};
use crate::align::{self, AlignmentParams};
use crate::classify::{self, LabeledPair, Norm, PairClassifier};
use crate::config::RunConfig;
use crate::corpus::{self, Subsection};
use crate::error::{Error, Result};
use crate::io::{self, ArtifactMeta};
use crate::metrics;
use crate::report;
use crate::sampler;
use crate::synth;

#[derive(Debug, Parser)]
#[command(
    name = "billsim",
    version,
    about = "Legislative bill similarity: subsection parsing, alignment classification, and bill-level aggregation"
)]
struct Cli {
    /// Run configuration file (TOML); flags override individual fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Global random seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for batch alignment and classification.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a directory of bill text files into subsection records.
    Ingest(IngestArgs),
    /// Report the most common word n-grams of a subsection corpus.
    Ngrams(NgramsArgs),
    /// Sample candidate subsection pairs inside the cosine band.
    Sample(SampleArgs),
    /// Generate class-conditioned synthetic pairs.
    Synth(SynthArgs),
    /// Train the alignment-feature classifier (optionally two-stage).
    Train(TrainArgs),
    /// Run the C / norm hyperparameter grid.
    Grid(GridArgs),
    /// Score predictions against gold labels.
    Eval(EvalArgs),
    /// Batch-label subsection pairs (and/or emit alignment features).
    Classify(ClassifyArgs),
    /// Section-level evaluation under the 4-category mapping.
    Sections(SectionsArgs),
    /// Bill-level similarity scores with co-occurrence binning.
    Billsim(BillsimArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Directory of UTF-8 bill files, one bill per file, filename = bill id.
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory for subsections.jsonl and stats files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct NgramsArgs {
    /// Subsection corpus (JSONL from `ingest`).
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    /// How many n-grams to keep per n.
    #[arg(long, default_value_t = 50)]
    top: usize,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// External embedding TSV (`subsection_id \t v1,v2,...`); TF-IDF otherwise.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    low: Option<f64>,
    #[arg(long)]
    high: Option<f64>,
    #[arg(long)]
    size: Option<usize>,
    /// Also consider pairs from within the same bill.
    #[arg(long)]
    include_intra_bill: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Synthetic pairs to generate per class.
    #[arg(long)]
    per_class: u64,
    /// Synonym lexicon TSV; the built-in lexicon is used when omitted.
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Human-labeled pairs CSV (id_a,id_b,label,provenance).
    #[arg(long)]
    pairs: PathBuf,
    /// Subsection corpus covering the pair ids.
    #[arg(long)]
    corpus: PathBuf,
    /// Synthetic pairs JSONL for the two-stage warm start.
    #[arg(long)]
    synthetic: Option<PathBuf>,
    #[arg(long)]
    model_out: PathBuf,
    /// Evaluation report (JSON) on the held-out test split.
    #[arg(long)]
    eval_out: Option<PathBuf>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_parser = parse_norm)]
    norm: Option<Norm>,
    /// Train on all pairs instead of the 7:1:2 split.
    #[arg(long)]
    no_split: bool,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Per-cell validation report CSV.
    #[arg(long)]
    out: PathBuf,
    /// Write the best cell's model here.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Gold labels CSV (id_a,id_b,label,provenance).
    #[arg(long)]
    gold: PathBuf,
    /// Predictions CSV (id_a,id_b,label[,p0..p4]).
    #[arg(long)]
    predictions: PathBuf,
    /// Evaluation report JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metric rows CSV.
    #[arg(long)]
    rows_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Pair list CSV with id_a,id_b columns (extra columns ignored).
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Trained model JSON; required unless only features are requested.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Predictions CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Alignment feature CSV output (id_a,id_b,raw_score,f1..f4).
    #[arg(long)]
    features_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SectionsArgs {
    /// Section units JSONL (same record schema as subsections).
    #[arg(long)]
    sections: PathBuf,
    /// Gold section pairs CSV (id_a,id_b,category) with categories 0..=3
    /// ordered by increasing similarity (3 = clear policy idea match).
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Per-pair predictions CSV instead of a model.
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Drop pairs where either side exceeds this many words
    /// (defaults to the filter's slice_max_words).
    #[arg(long)]
    max_words: Option<usize>,
    /// Label a pair by the maximum over 400-word window pairs instead of
    /// classifying the whole section text directly.
    #[arg(long)]
    aggregate_windows: bool,
}

#[derive(Debug, Args)]
struct BillsimArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Per-subsection-pair predictions CSV instead of a model.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Explicit bill pairs CSV (bill_i,bill_j).
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Lobbying co-occurrence counts CSV (bill_i,bill_j,count).
    #[arg(long)]
    cooccurrence: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Per-bin summary CSV (only with --cooccurrence).
    #[arg(long)]
    summary_out: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    min_subsections: usize,
    #[arg(long, default_value_t = 600)]
    per_bin_cap: usize,
}

fn parse_norm(s: &str) -> std::result::Result<Norm, String> {
    match s.to_ascii_lowercase().as_str() {
        "l2" => Ok(Norm::L2),
        "none" => Ok(Norm::None),
        other => Err(format!("unknown norm {other:?} (expected l2 or none)")),
    }
}

/// Parses argv and runs the selected subcommand, mapping every failure to
/// the documented exit codes.
pub fn dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(inner) = source {
                eprintln!("  caused by: {inner}");
                source = inner.source();
            }
            2
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_toml_path(path)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(config.seed);
    config = config.with_seed(seed);
    let jobs = cli.jobs.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?;

    pool.install(|| match cli.command {
        Command::Ingest(args) => cmd_ingest(&config, args),
        Command::Ngrams(args) => cmd_ngrams(&config, args),
        Command::Sample(args) => cmd_sample(&config, args),
        Command::Synth(args) => cmd_synth(&config, args),
        Command::Train(args) => cmd_train(&config, args),
        Command::Grid(args) => cmd_grid(&config, args),
        Command::Eval(args) => cmd_eval(&config, args),
        Command::Classify(args) => cmd_classify(&config, args),
        Command::Sections(args) => cmd_sections(&config, args),
        Command::Billsim(args) => cmd_billsim(&config, args),
    })
}

fn meta_for(config: &RunConfig) -> ArtifactMeta {
    ArtifactMeta::new(config.seed, &config.config_hash())
}

/// JSON artifact = the serialized value plus a `billsim_meta` key.
fn write_json_with_meta<T: serde::Serialize>(
    path: &Path,
    value: &T,
    meta: &ArtifactMeta,
) -> Result<()> {
    let mut value = serde_json::to_value(value).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    value["billsim_meta"] = serde_json::to_value(meta).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    let text = serde_json::to_string_pretty(&value).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

fn cmd_ingest(config: &RunConfig, args: IngestArgs) -> Result<()> {
    let corpus_dir = &args.corpus;
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir)
        .map_err(|e| Error::io(corpus_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().map(|e| e == "txt").unwrap_or(false))
        .collect();
    if files.is_empty() {
        return Err(Error::validation(format!(
            "no .txt bill files found under {}",
            corpus_dir.display()
        )));
    }
    files.sort();

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let meta = meta_for(config);

    struct BillOutput {
        raw_count: usize,
        boilerplate_removed: usize,
        survivors: Vec<Subsection>,
        warnings: Vec<String>,
    }

    let per_bill: Vec<Result<BillOutput>> = files
        .par_iter()
        .map(|path| {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let bill_id = path.file_stem().and_then(|s| s.to_str()).ok_or_else(|| {
                Error::validation(format!("bad bill filename {}", path.display()))
            })?;
            let bill = corpus::parse_bill(&text, bill_id);
            let raw_count = bill.subsections.len();
            let (survivors, boilerplate_removed) =
                corpus::preprocess_subsections(bill.subsections, &config.filter);
            Ok(BillOutput {
                raw_count,
                boilerplate_removed,
                survivors,
                warnings: bill.warnings,
            })
        })
        .collect();

    let mut stats = corpus::CorpusStats::default();
    let out_path = args.out.join("subsections.jsonl");
    let mut all = Vec::new();
    let mut warnings = 0usize;
    for result in per_bill {
        let output = result?;
        stats.absorb_bill(
            output.raw_count,
            output.boilerplate_removed,
            &output.survivors,
        );
        warnings += output.warnings.len();
        all.extend(output.survivors);
    }
    io::write_subsections(&out_path, &meta, all)?;

    let stats_json = serde_json::json!({
        "billsim_meta": meta,
        "bills": stats.bills,
        "subsections": stats.subsections_raw,
        "boilerplate_removed": stats.boilerplate_removed,
        "subsections_without_boilerplate": stats.subsections_raw - stats.boilerplate_removed,
        "subsections_final": stats.subsections_final,
        "mean_words_final": stats.mean_words(),
        "parse_warnings": warnings,
    });
    let stats_path = args.out.join("stats.json");
    std::fs::write(
        &stats_path,
        serde_json::to_string_pretty(&stats_json).expect("static shape"),
    )
    .map_err(|e| Error::io(&stats_path, e))?;

    let table = format!(
        "{:<36}{:>12}\n{:<36}{:>12}\n{:<36}{:>12}\n{:<36}{:>12}\n{:<36}{:>12.1}\n",
        "Bills",
        stats.bills,
        "Subsections",
        stats.subsections_raw,
        "Subsections without boilerplate",
        stats.subsections_raw - stats.boilerplate_removed,
        "Subsections after length/slicing",
        stats.subsections_final,
        "Average # words in subsection",
        stats.mean_words(),
    );
    let txt_path = args.out.join("stats.txt");
    std::fs::write(&txt_path, &table).map_err(|e| Error::io(&txt_path, e))?;
    print!("{table}");
    Ok(())
}

// ---------------------------------------------------------------------------
// ngrams
// ---------------------------------------------------------------------------

fn cmd_ngrams(config: &RunConfig, args: NgramsArgs) -> Result<()> {
    let (_, subsections) = io::read_subsections(&args.corpus)?;
    let counts = corpus::top_common_ngrams(&subsections, args.n_min, args.n_max, args.top)?;
    io::write_tsv_ngrams(&args.out, &meta_for(config), &counts)?;
    println!("{} n-gram rows -> {}", counts.len(), args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

fn cmd_sample(config: &RunConfig, args: SampleArgs) -> Result<()> {
    let (_, subsections) = io::read_subsections(&args.corpus)?;
    let mut sampler_config = config.sampler.clone();
    if let Some(low) = args.low {
        sampler_config.sim_low = low;
    }
    if let Some(high) = args.high {
        sampler_config.sim_high = high;
    }
    if let Some(size) = args.size {
        sampler_config.sample_size = size;
    }
    if args.include_intra_bill {
        sampler_config.include_intra_bill = true;
    }
    sampler_config.validate()?;

    let source = match &args.embeddings {
        Some(path) => sampler::EmbeddingSource::ExternalFile(path.clone()),
        None => sampler::EmbeddingSource::InternalTfidf,
    };
    let vectors = sampler::load_vectors(&source, &subsections)?;
    if !vectors.zero_flagged.is_empty() {
        eprintln!(
            "note: {} zero-vector subsection(s) excluded from sampling",
            vectors.zero_flagged.len()
        );
    }
    let pairs = sampler::candidate_pairs(&vectors, &sampler_config)?;
    let records: Vec<io::CandidateRecord> = pairs
        .into_iter()
        .map(|p| io::CandidateRecord {
            id_a: p.id_a,
            id_b: p.id_b,
            cosine: p.cosine,
        })
        .collect();
    println!(
        "{} candidate pairs -> {}",
        records.len(),
        args.out.display()
    );
    io::write_csv_records(&args.out, &meta_for(config), records)
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn cmd_synth(config: &RunConfig, args: SynthArgs) -> Result<()> {
    let (_, pool) = io::read_subsections(&args.corpus)?;
    if pool.is_empty() {
        return Err(Error::validation("synth: empty corpus"));
    }
    let mut synth_config = config.synth.clone();
    if args.lexicon.is_some() {
        synth_config.synonym_lexicon = args.lexicon.clone();
    }
    synth_config.validate()?;
    let lexicon = synth_config.load_lexicon()?;

    // Deterministic source selection per (class, index); generation itself is
    // seeded per pair, so parallel scheduling cannot change output.
    let usable: Vec<&Subsection> = pool.iter().filter(|s| !s.tokens.is_empty()).collect();
    if usable.is_empty() {
        return Err(Error::validation(
            "synth: corpus has no nonempty subsections",
        ));
    }
    let tasks: Vec<(u8, u64)> = (0u8..5)
        .flat_map(|class| (0..args.per_class).map(move |i| (class, i)))
        .collect();
    let pairs: Vec<Result<synth::SyntheticPair>> = tasks
        .par_iter()
        .map(|&(class, index)| {
            let pick = synth::pair_seed(synth_config.seed, "source-pick", class, index) as usize
                % usable.len();
            synth::generate_pair(usable[pick], class, &pool, &synth_config, &lexicon, index)
        })
        .collect();
    let mut records = Vec::with_capacity(pairs.len());
    for pair in pairs {
        records.push(pair?);
    }
    println!(
        "{} synthetic pairs -> {}",
        records.len(),
        args.out.display()
    );
    io::write_synth_pairs(&args.out, &meta_for(config), records)
}

// ---------------------------------------------------------------------------
// shared training plumbing
// ---------------------------------------------------------------------------

/// Token store resolving pair ids to token lists, from the corpus plus any
/// synthetic pair texts.
struct TokenStore {
    by_id: HashMap<String, Vec<String>>,
}

impl TokenStore {
    fn from_corpus(subsections: &[Subsection]) -> TokenStore {
        TokenStore {
            by_id: subsections
                .iter()
                .map(|s| (s.subsection_id.clone(), s.tokens.clone()))
                .collect(),
        }
    }

    fn absorb_synth(&mut self, records: &[io::SynthPairRecord]) {
        for r in records {
            self.by_id
                .entry(r.id_a.clone())
                .or_insert_with(|| corpus::tokenize(&r.text_a));
            self.by_id
                .entry(r.id_b.clone())
                .or_insert_with(|| corpus::tokenize(&r.text_x));
        }
    }

    fn tokens(&self, id: &str) -> Result<&[String]> {
        self.by_id
            .get(id)
            .map(|t| t.as_slice())
            .ok_or_else(|| Error::validation(format!("unknown subsection id {id:?}")))
    }

    fn features(&self, pair: &LabeledPair, params: &AlignmentParams) -> Result<Vec<f64>> {
        let a = self.tokens(&pair.id_a)?;
        let b = self.tokens(&pair.id_b)?;
        Ok(align::similarity_features(a, b, params).to_vec())
    }
}

fn load_labeled_pairs(path: &Path) -> Result<(Option<ArtifactMeta>, Vec<LabeledPair>)> {
    let (meta, records): (_, Vec<io::LabeledPairRecord>) = io::read_csv_records(path)?;
    let mut pairs = Vec::with_capacity(records.len());
    for r in records {
        pairs.push(r.into_pair()?);
    }
    Ok((meta, pairs))
}

/// Model JSON is the classifier fields plus a `billsim_meta` key carrying
/// the artifact metadata, so models participate in hash-mixing checks.
fn write_model(path: &Path, model: &PairClassifier, meta: &ArtifactMeta) -> Result<()> {
    let mut value = serde_json::to_value(model).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    value["billsim_meta"] = serde_json::to_value(meta).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    let text = serde_json::to_string_pretty(&value).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_model(path: &Path) -> Result<(Option<ArtifactMeta>, PairClassifier)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let model = PairClassifier::from_json(&text)?;
    let meta = serde_json::from_str::<serde_json::Value>(&text)
        .ok()
        .and_then(|v| v.get("billsim_meta").cloned())
        .and_then(|m| serde_json::from_value(m).ok());
    Ok((meta, model))
}

fn evaluate_pairs(
    model: &PairClassifier,
    pairs: &[LabeledPair],
    store: &TokenStore,
    params: &AlignmentParams,
) -> Result<metrics::EvalReport> {
    let gold: Vec<u8> = pairs.iter().map(|p| p.label).collect();
    let pred: Vec<u8> = pairs
        .par_iter()
        .map(|p| {
            let features = store.features(p, params)?;
            Ok(model.predict(&features)?.0)
        })
        .collect::<Result<Vec<u8>>>()?;
    metrics::evaluate(&gold, &pred, classify::NUM_CLASSES)
}

fn class_names() -> Vec<&'static str> {
    (0u8..5).map(classify::label_name).collect()
}

fn cmd_train(config: &RunConfig, args: TrainArgs) -> Result<()> {
    let (pairs_meta, human) = load_labeled_pairs(&args.pairs)?;
    let (corpus_meta, subsections) = io::read_subsections(&args.corpus)?;
    let mut store = TokenStore::from_corpus(&subsections);

    let synthetic = match &args.synthetic {
        Some(path) => {
            let (synth_meta, records) = io::read_synth_pairs(path)?;
            io::check_meta_consistency(&[
                (&args.pairs, &pairs_meta),
                (args.corpus.as_path(), &corpus_meta),
                (path.as_path(), &synth_meta),
            ])?;
            store.absorb_synth(&records);
            records
                .into_iter()
                .map(|r| LabeledPair {
                    id_a: r.id_a,
                    id_b: r.id_b,
                    label: r.label,
                    provenance: r.provenance,
                })
                .collect()
        }
        None => {
            io::check_meta_consistency(&[
                (&args.pairs, &pairs_meta),
                (args.corpus.as_path(), &corpus_meta),
            ])?;
            Vec::new()
        }
    };

    let c = args.c.unwrap_or(config.classifier.c);
    let norm = args.norm.unwrap_or(config.classifier.norm);
    let params = config.alignment;
    let features_fn = |p: &LabeledPair| store.features(p, &params);

    let (train_set, test_set) = if args.no_split {
        (human.clone(), Vec::new())
    } else {
        let split = classify::split_dataset(&human, (0.7, 0.1, 0.2), config.seed)?;
        (split.train, split.test)
    };

    let model = classify::two_stage_train(&synthetic, &train_set, features_fn, c, norm, &params)?;
    write_model(&args.model_out, &model, &meta_for(config))?;
    println!(
        "trained on {} human pairs{} -> {}",
        train_set.len(),
        if synthetic.is_empty() {
            String::new()
        } else {
            format!(" (warm start: {} synthetic)", synthetic.len())
        },
        args.model_out.display()
    );

    if !test_set.is_empty() {
        let eval = evaluate_pairs(&model, &test_set, &store, &params)?;
        print!("{}", report::render_eval_text(&eval, &class_names()));
        if let Some(path) = &args.eval_out {
            write_json_with_meta(path, &eval, &meta_for(config))?;
        }
    }
    Ok(())
}

fn cmd_grid(config: &RunConfig, args: GridArgs) -> Result<()> {
    let (pairs_meta, human) = load_labeled_pairs(&args.pairs)?;
    let (corpus_meta, subsections) = io::read_subsections(&args.corpus)?;
    io::check_meta_consistency(&[
        (&args.pairs, &pairs_meta),
        (args.corpus.as_path(), &corpus_meta),
    ])?;
    let store = TokenStore::from_corpus(&subsections);
    let params = config.alignment;
    let split = classify::split_dataset(&human, (0.7, 0.1, 0.2), config.seed)?;
    let features_fn = |p: &LabeledPair| store.features(p, &params);
    let (grid_report, best_model) =
        classify::grid_search(&split, features_fn, &classify::default_grid(), &params)?;

    #[derive(serde::Serialize)]
    struct GridRow {
        c: f64,
        norm: String,
        validation_macro_f1: f64,
        validation_accuracy: f64,
        best: bool,
    }
    let rows: Vec<GridRow> = grid_report
        .cells
        .iter()
        .map(|cell| GridRow {
            c: cell.c,
            norm: cell.norm.to_string(),
            validation_macro_f1: cell.validation_macro_f1,
            validation_accuracy: cell.validation_accuracy,
            best: cell.c == grid_report.best_c && cell.norm == grid_report.best_norm,
        })
        .collect();
    io::write_csv_records(&args.out, &meta_for(config), rows)?;
    println!(
        "{} cells evaluated; best C = {}, norm = {}",
        grid_report.cells.len(),
        grid_report.best_c,
        grid_report.best_norm
    );
    if let Some(path) = &args.model_out {
        write_model(path, &best_model, &meta_for(config))?;
    }
    Ok(())
}

fn cmd_eval(config: &RunConfig, args: EvalArgs) -> Result<()> {
    let (gold_meta, gold_pairs) = load_labeled_pairs(&args.gold)?;
    let (pred_meta, predictions) = io::read_predictions(&args.predictions)?;
    io::check_meta_consistency(&[
        (&args.gold, &gold_meta),
        (args.predictions.as_path(), &pred_meta),
    ])?;

    let by_pair: HashMap<(String, String), u8> = predictions
        .into_iter()
        .map(|p| ((p.id_a, p.id_b), p.label))
        .collect();
    let mut gold = Vec::with_capacity(gold_pairs.len());
    let mut pred = Vec::with_capacity(gold_pairs.len());
    for pair in &gold_pairs {
        let key = (pair.id_a.clone(), pair.id_b.clone());
        let rev = (pair.id_b.clone(), pair.id_a.clone());
        let Some(&label) = by_pair.get(&key).or_else(|| by_pair.get(&rev)) else {
            return Err(Error::validation(format!(
                "no prediction for pair ({}, {})",
                pair.id_a, pair.id_b
            )));
        };
        gold.push(pair.label);
        pred.push(label);
    }
    let eval = metrics::evaluate(&gold, &pred, classify::NUM_CLASSES)?;
    print!("{}", report::render_eval_text(&eval, &class_names()));
    if let Some(path) = &args.out {
        write_json_with_meta(path, &eval, &meta_for(config))?;
    }
    if let Some(path) = &args.rows_out {
        let rows = report::eval_to_rows(&eval, &class_names())?;
        io::write_csv_records(path, &meta_for(config), rows)?;
    }
    Ok(())
}

#[derive(Debug, serde::Deserialize)]
struct PairIdsRecord {
    id_a: String,
    id_b: String,
}

fn cmd_classify(config: &RunConfig, args: ClassifyArgs) -> Result<()> {
    if args.out.is_none() && args.features_out.is_none() {
        return Err(Error::validation(
            "classify: need --out and a model, or --features-out",
        ));
    }
    if args.out.is_some() && args.model.is_none() {
        return Err(Error::validation("classify: --out requires --model"));
    }
    let (pairs_meta, pair_ids): (_, Vec<PairIdsRecord>) = io::read_csv_records(&args.pairs)?;
    let (corpus_meta, subsections) = io::read_subsections(&args.corpus)?;
    io::check_meta_consistency(&[
        (&args.pairs, &pairs_meta),
        (args.corpus.as_path(), &corpus_meta),
    ])?;
    let store = TokenStore::from_corpus(&subsections);
    let params = config.alignment;

    let features: Vec<(String, String, align::AlignmentResult, [f64; 4])> = pair_ids
        .par_iter()
        .map(|p| {
            let a = store.tokens(&p.id_a)?;
            let b = store.tokens(&p.id_b)?;
            let result = align::local_align(a, b, &params);
            let feats = align::features_from_result(&result, a.len(), b.len(), &params);
            Ok((p.id_a.clone(), p.id_b.clone(), result, feats))
        })
        .collect::<Result<_>>()?;

    if let Some(path) = &args.features_out {
        let records: Vec<io::FeatureRecord> = features
            .iter()
            .map(|(id_a, id_b, result, f)| io::FeatureRecord {
                id_a: id_a.clone(),
                id_b: id_b.clone(),
                raw_score: result.raw_score,
                f1: f[0],
                f2: f[1],
                f3: f[2],
                f4: f[3],
            })
            .collect();
        io::write_csv_records(path, &meta_for(config), records)?;
    }

    if let (Some(out), Some(model_path)) = (&args.out, &args.model) {
        let (model_meta, model) = load_model(model_path)?;
        io::check_meta_consistency(&[
            (args.corpus.as_path(), &corpus_meta),
            (model_path.as_path(), &model_meta),
        ])?;
        let records: Vec<io::PredictionRecord> = features
            .par_iter()
            .map(|(id_a, id_b, _, feats)| {
                let (label, probs) = model.predict(feats)?;
                Ok(io::PredictionRecord {
                    id_a: id_a.clone(),
                    id_b: id_b.clone(),
                    label,
                    p0: Some(probs[0]),
                    p1: Some(probs[1]),
                    p2: Some(probs[2]),
                    p3: Some(probs[3]),
                    p4: Some(probs[4]),
                })
            })
            .collect::<Result<_>>()?;
        io::write_csv_records(out, &meta_for(config), records)?;
        println!("{} pairs classified -> {}", features.len(), out.display());
    }
    Ok(())
}

#[derive(Debug, serde::Deserialize)]
struct SectionPairRecord {
    id_a: String,
    id_b: String,
    category: u8,
}

fn cmd_sections(config: &RunConfig, args: SectionsArgs) -> Result<()> {
    let (sections_meta, sections) = io::read_subsections(&args.sections)?;
    let (pairs_meta, gold_pairs): (_, Vec<SectionPairRecord>) = io::read_csv_records(&args.pairs)?;
    io::check_meta_consistency(&[
        (args.sections.as_path(), &sections_meta),
        (&args.pairs, &pairs_meta),
    ])?;
    let store = TokenStore::from_corpus(&sections);
    let params = config.alignment;
    let max_words = args.max_words.unwrap_or(config.filter.slice_max_words);

    enum Labeler {
        Model(Box<PairClassifier>),
        Predictions(HashMap<(String, String), u8>),
    }
    let labeler = match (&args.model, &args.predictions) {
        (Some(path), None) => {
            let (model_meta, model) = load_model(path)?;
            io::check_meta_consistency(&[
                (args.sections.as_path(), &sections_meta),
                (path.as_path(), &model_meta),
            ])?;
            Labeler::Model(Box::new(model))
        }
        (None, Some(path)) => {
            let (_, predictions) = io::read_predictions(path)?;
            Labeler::Predictions(
                predictions
                    .into_iter()
                    .map(|p| ((p.id_a, p.id_b), p.label))
                    .collect(),
            )
        }
        _ => {
            return Err(Error::validation(
                "sections: exactly one of --model / --predictions is required",
            ))
        }
    };

    let label_pair = |id_a: &str, id_b: &str| -> Result<u8> {
        match &labeler {
            Labeler::Predictions(map) => map
                .get(&(id_a.to_string(), id_b.to_string()))
                .or_else(|| map.get(&(id_b.to_string(), id_a.to_string())))
                .copied()
                .ok_or_else(|| Error::validation(format!("no prediction for ({id_a}, {id_b})"))),
            Labeler::Model(model) => {
                let a = store.tokens(id_a)?;
                let b = store.tokens(id_b)?;
                if args.aggregate_windows {
                    let windows = |t: &[String]| -> Vec<Vec<String>> {
                        t.chunks(max_words.max(1)).map(|c| c.to_vec()).collect()
                    };
                    let mut best = 0u8;
                    for wa in windows(a) {
                        for wb in windows(b) {
                            let feats = align::similarity_features(&wa, &wb, &params);
                            best = best.max(model.predict(&feats)?.0);
                        }
                    }
                    Ok(best)
                } else {
                    let feats = align::similarity_features(a, b, &params);
                    Ok(model.predict(&feats)?.0)
                }
            }
        }
    };

    let mut gold = Vec::new();
    let mut pred = Vec::new();
    let mut dropped = 0usize;
    let direct = !args.aggregate_windows;
    for pair in &gold_pairs {
        if pair.category > 3 {
            return Err(Error::validation(format!(
                "section pair ({}, {}): category {} outside 0..=3",
                pair.id_a, pair.id_b, pair.category
            )));
        }
        if direct {
            let len_a = store.tokens(&pair.id_a)?.len();
            let len_b = store.tokens(&pair.id_b)?.len();
            if len_a > max_words || len_b > max_words {
                dropped += 1;
                continue;
            }
        }
        let label = label_pair(&pair.id_a, &pair.id_b)?;
        let category = aggregate::map_section_labels(label)?;
        gold.push(pair.category);
        pred.push(category.index());
    }
    if gold.is_empty() {
        return Err(Error::validation(
            "sections: no section pairs left to evaluate",
        ));
    }
    let eval = metrics::evaluate(&gold, &pred, 4)?;
    let names: Vec<&str> = aggregate::SectionCategory::ALL
        .iter()
        .map(|c| c.name())
        .collect();
    if dropped > 0 {
        println!("{dropped} outlier section pair(s) dropped (> {max_words} words)");
    }
    print!("{}", report::render_eval_text(&eval, &names));
    if let Some(path) = &args.out {
        write_json_with_meta(path, &eval, &meta_for(config))?;
    }
    Ok(())
}

#[derive(Debug, serde::Deserialize)]
struct BillPairRecord {
    bill_i: String,
    bill_j: String,
}

fn cmd_billsim(config: &RunConfig, args: BillsimArgs) -> Result<()> {
    let (corpus_meta, subsections) = io::read_subsections(&args.corpus)?;
    let mut bills: HashMap<String, Vec<Subsection>> = HashMap::new();
    for sub in subsections {
        bills.entry(sub.bill_id.clone()).or_default().push(sub);
    }
    let params = config.alignment;

    enum Labeler {
        Model(Box<PairClassifier>),
        Predictions(HashMap<(String, String), u8>),
    }
    let labeler = match (&args.model, &args.predictions) {
        (Some(path), None) => {
            let (model_meta, model) = load_model(path)?;
            io::check_meta_consistency(&[
                (args.corpus.as_path(), &corpus_meta),
                (path.as_path(), &model_meta),
            ])?;
            Labeler::Model(Box::new(model))
        }
        (None, Some(path)) => {
            let (_, predictions) = io::read_predictions(path)?;
            Labeler::Predictions(
                predictions
                    .into_iter()
                    .map(|p| ((p.id_a, p.id_b), p.label))
                    .collect(),
            )
        }
        _ => {
            return Err(Error::validation(
                "billsim: exactly one of --model / --predictions is required",
            ))
        }
    };

    // (bill_i, bill_j, bin label) tasks.
    let tasks: Vec<(String, String, String)> = match (&args.pairs, &args.cooccurrence) {
        (Some(path), None) => {
            let (_, records): (_, Vec<BillPairRecord>) = io::read_csv_records(path)?;
            records
                .into_iter()
                .map(|r| (r.bill_i, r.bill_j, String::new()))
                .collect()
        }
        (None, Some(path)) => {
            let (_, records): (_, Vec<io::CooccurrenceInputRecord>) = io::read_csv_records(path)?;
            let counts: Vec<(String, String, u64)> = records
                .into_iter()
                .map(|r| (r.bill_i, r.bill_j, r.count))
                .collect();
            let sizes: HashMap<String, usize> = bills
                .iter()
                .map(|(id, subs)| (id.clone(), subs.len()))
                .collect();
            let binned = aggregate::cooccurrence_bins(
                &counts,
                &sizes,
                args.min_subsections,
                args.per_bin_cap,
                config.seed,
            );
            binned
                .into_iter()
                .map(|r| (r.bill_i, r.bill_j, r.bin.label().to_string()))
                .collect()
        }
        _ => {
            return Err(Error::validation(
                "billsim: exactly one of --pairs / --cooccurrence is required",
            ))
        }
    };

    let score_pair = |bill_i: &str, bill_j: &str| -> Result<aggregate::BillSimilarity> {
        let bi = bills
            .get(bill_i)
            .ok_or_else(|| Error::validation(format!("bill {bill_i:?} not in corpus")))?;
        let bj = bills
            .get(bill_j)
            .ok_or_else(|| Error::validation(format!("bill {bill_j:?} not in corpus")))?;
        match &labeler {
            Labeler::Model(model) => {
                let f = aggregate::classifier_labeler(model, &params);
                aggregate::bill_similarity(bi, bj, f)
            }
            Labeler::Predictions(map) => {
                let f = aggregate::prediction_labeler(map);
                aggregate::bill_similarity(bi, bj, f)
            }
        }
    };

    let results: Vec<io::BillSimRecord> = tasks
        .par_iter()
        .map(|(bill_i, bill_j, bin)| {
            let sim = score_pair(bill_i, bill_j)?;
            Ok(io::BillSimRecord {
                bill_i: bill_i.clone(),
                bill_j: bill_j.clone(),
                sigma_star_ij: sim.sigma_star_ij,
                sigma_star_ji: sim.sigma_star_ji,
                score: sim.score,
                bin: bin.clone(),
            })
        })
        .collect::<Result<_>>()?;
    io::write_csv_records(&args.out, &meta_for(config), results.clone())?;
    println!(
        "{} bill pairs scored -> {}",
        results.len(),
        args.out.display()
    );

    if args.cooccurrence.is_some() {
        let rows: Vec<(String, f64)> = results.iter().map(|r| (r.bin.clone(), r.score)).collect();
        let order: Vec<&str> = CooccurrenceBin::ALL.iter().map(|b| b.label()).collect();
        let summaries = report::summarize_bins(&rows, &order);
        print!("{}", report::render_bin_summary_text(&summaries));
        if let Some(path) = &args.summary_out {
            io::write_csv_records(path, &meta_for(config), summaries)?;
        }
    }
    Ok(())
}
