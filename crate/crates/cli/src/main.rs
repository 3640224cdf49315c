//! `arclab` — command-line front end for the grid reasoning toolkit.
//!
//! Three subcommands cover the full workflow:
//!
//! - `gen`: write a seeded, self-verified benchmark dataset (task JSON files
//!   plus a manifest).
//! - `eval`: run a task × encoding × strategy × model evaluation matrix
//!   against a replay store or a live chat-completion endpoint, producing
//!   `records.jsonl`, `table.md`, and `table.csv`.
//! - `analyze`: fit the solvability logistic regression from run records and
//!   write the coefficient / precision-recall report.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use arclab_core::datagen::{generate_dataset, parse_families, GenParams, Manifest};
use arclab_core::gateway::{
    BackendKind, Gateway, HttpChatTransport, LiveOptions, ReplayStore, DEFAULT_API_KEY_ENV,
    DEFAULT_ENDPOINT,
};
use arclab_core::graph::load_override_table;
use arclab_core::harness::{
    aggregate, aggregate_by_family, load_dataset, load_records, ratio_summary, records_path,
    render_csv, render_markdown, run_matrix, EncodingSpec, ResultTable, RunConfig, Verdict,
    ALL_ENCODING_LABELS,
};
use arclab_core::prompt::PromptStrategy;
use arclab_core::solvability::{
    evaluate, extract_features, fit, labels_from_records, render_report, FeatureVector, FitOptions,
};
use arclab_core::task::Color;

#[derive(Parser)]
#[command(
    name = "arclab",
    version,
    about = "Grid-puzzle encodings, evaluation harness, and solvability analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark dataset of task JSON files plus a manifest
    Gen(GenArgs),
    /// Run an evaluation matrix and write records and result tables
    Eval(EvalArgs),
    /// Fit the solvability regression from run records and write a report
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Family selector: `all`, `1d`, `2d`, or comma-separated family tags
    #[arg(long, default_value = "all")]
    families: String,
    /// Base seed; the same seed always regenerates identical files
    #[arg(long)]
    seed: u64,
    /// Output directory for task files and `manifest.json`
    #[arg(long)]
    out: PathBuf,
    /// Tasks per family
    #[arg(long, default_value_t = 50)]
    per_type: usize,
    /// Row length for 1D families and grid width for 2D families
    #[arg(long, default_value_t = 15)]
    width: usize,
    /// Training pairs per task
    #[arg(long, default_value_t = 3)]
    num_train: usize,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of task JSON files (a manifest, if present, adds a
    /// per-family breakdown to the Markdown table)
    #[arg(long)]
    dataset: PathBuf,
    /// Comma-separated encoding labels, e.g. `word-pipe,object-json`
    #[arg(long, value_delimiter = ',', required = true)]
    encodings: Vec<String>,
    /// Comma-separated prompt strategies: `fewshot`, `cot`
    #[arg(long, value_delimiter = ',', required = true)]
    strategies: Vec<String>,
    /// Comma-separated model names
    #[arg(long, value_delimiter = ',', required = true)]
    models: Vec<String>,
    /// `replay` (offline, from the store) or `live` (HTTP, recording into
    /// the store)
    #[arg(long, default_value = "replay")]
    backend: String,
    /// Output directory for `records.jsonl`, `table.md`, and `table.csv`
    #[arg(long)]
    out: PathBuf,
    /// Completion store path [default: <OUT>/store.jsonl]
    #[arg(long)]
    store: Option<PathBuf>,
    /// JSON file mapping task ids to abstraction strategy tags
    #[arg(long)]
    overrides: Option<PathBuf>,
    /// Live only: chat-completions endpoint URL
    #[arg(long)]
    endpoint: Option<String>,
    /// Live only: environment variable holding the API key
    #[arg(long)]
    api_key_env: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// `records.jsonl` produced by `eval`
    #[arg(long)]
    records: PathBuf,
    /// Dataset directory the records were produced from
    #[arg(long)]
    dataset: PathBuf,
    /// Report output path
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => run_gen(args),
        Command::Eval(args) => run_eval(args),
        Command::Analyze(args) => run_analyze(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run_gen(args: GenArgs) -> Result<()> {
    let families = parse_families(&args.families).map_err(|e| anyhow!(e))?;
    let mut params = GenParams::new(args.seed);
    params.tasks_per_type = args.per_type;
    params.width = args.width;
    params.num_train = args.num_train;
    let manifest = generate_dataset(&families, &params, &args.out)
        .with_context(|| format!("generating into {}", args.out.display()))?;
    println!(
        "generated {} tasks across {} families into {}",
        manifest.entries.len(),
        families.len(),
        args.out.display()
    );
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let backend = match args.backend.as_str() {
        "replay" => BackendKind::Replay,
        "live" => BackendKind::Live,
        other => bail!("unknown backend {other:?}; expected `replay` or `live`"),
    };
    if backend == BackendKind::Replay {
        if args.endpoint.is_some() {
            bail!("--endpoint is only valid with --backend live");
        }
        if args.api_key_env.is_some() {
            bail!("--api-key-env is only valid with --backend live");
        }
    }

    let mut cfg = RunConfig::new(&args.dataset, &args.out);
    cfg.backend = backend;
    for label in &args.encodings {
        let spec = EncodingSpec::from_label(label).ok_or_else(|| {
            anyhow!(
                "unknown encoding {label:?}; valid labels: {}",
                ALL_ENCODING_LABELS.join(", ")
            )
        })?;
        cfg.encodings.push(spec);
    }
    for label in &args.strategies {
        let strategy = PromptStrategy::from_label(label)
            .ok_or_else(|| anyhow!("unknown strategy {label:?}; valid labels: fewshot, cot"))?;
        cfg.strategies.push(strategy);
    }
    cfg.models = args.models.clone();
    if let Some(path) = &args.overrides {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        cfg.overrides = Some(load_override_table(&text)?);
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let store_path = args
        .store
        .clone()
        .unwrap_or_else(|| args.out.join("store.jsonl"));
    if backend == BackendKind::Replay && !store_path.exists() {
        bail!(
            "replay store {} does not exist; record one with `--backend live` or point --store at an existing file",
            store_path.display()
        );
    }
    let store = ReplayStore::open(&store_path)?;
    let gateway = match backend {
        BackendKind::Replay => Gateway::replay(store),
        BackendKind::Live => {
            let endpoint = args
                .endpoint
                .clone()
                .unwrap_or_else(|| DEFAULT_ENDPOINT.to_string());
            let env_var = args
                .api_key_env
                .clone()
                .unwrap_or_else(|| DEFAULT_API_KEY_ENV.to_string());
            let transport = HttpChatTransport::from_env(endpoint, &env_var)?;
            Gateway::live(store, Box::new(transport), LiveOptions::default())
        }
    };

    let records = run_matrix(&cfg, &gateway)?;
    let table = aggregate(&records)?;

    // Per-family breakdown when the dataset came from `gen`.
    let families: Option<BTreeMap<String, ResultTable>> =
        if args.dataset.join(Manifest::FILE_NAME).exists() {
            let manifest = Manifest::load(&args.dataset)?;
            let family_of: HashMap<String, String> = manifest
                .entries
                .iter()
                .map(|e| (e.id.clone(), e.family.clone()))
                .collect();
            Some(aggregate_by_family(&records, &family_of)?)
        } else {
            None
        };

    std::fs::write(args.out.join("table.md"), render_markdown(&table, families.as_ref()))?;
    std::fs::write(args.out.join("table.csv"), render_csv(&table))?;

    let solved = records.iter().filter(|r| r.verdict == Verdict::Solved).count();
    println!(
        "{} records over {} tasks; {solved} solved; tables written to {}",
        records.len(),
        table.total,
        args.out.display()
    );
    if let Some(summary) = ratio_summary(&table) {
        for ((strategy, model), ratio) in summary.columns.iter().zip(&summary.ratios) {
            println!("object vs direct, {strategy} / {model}: {ratio}");
        }
    }

    let errored = records.iter().filter(|r| r.error_note.is_some()).count();
    if errored > 0 {
        bail!(
            "matrix incomplete: {errored} of {} cells had no usable completion (see error_note fields in {})",
            records.len(),
            records_path(&args.out).display()
        );
    }
    Ok(())
}

fn run_analyze(args: AnalyzeArgs) -> Result<()> {
    let records = load_records(&args.records)?;
    if records.is_empty() {
        bail!("no run records in {}", args.records.display());
    }
    let labels = labels_from_records(&records);
    let tasks = load_dataset(&args.dataset)?;

    let mut features: Vec<FeatureVector<f64>> = Vec::new();
    let mut solved: Vec<bool> = Vec::new();
    let mut unlabeled = 0usize;
    for task in &tasks {
        match labels.get(&task.id) {
            Some(&label) => {
                features.push(extract_features(task, Color::BACKGROUND));
                solved.push(label);
            }
            None => unlabeled += 1,
        }
    }
    if unlabeled > 0 {
        eprintln!("warning: {unlabeled} dataset tasks have no run records and were skipped");
    }
    let unknown = labels
        .keys()
        .filter(|id| !tasks.iter().any(|t| &t.id == *id))
        .count();
    if unknown > 0 {
        eprintln!("warning: {unknown} recorded task ids are not in the dataset and were ignored");
    }
    if features.is_empty() {
        bail!(
            "no overlap between tasks in {} and records in {}",
            args.dataset.display(),
            args.records.display()
        );
    }

    let model = fit(&features, &solved, &FitOptions::default())?;
    let report = evaluate(&model, &features, &solved);
    let text = render_report(&report);
    std::fs::write(&args.out, &text)
        .with_context(|| format!("writing {}", args.out.display()))?;
    print!("{text}");
    println!("report written to {}", args.out.display());
    Ok(())
}
