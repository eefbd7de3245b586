//! Command-line surface: rank selectors on a dataset, run the CV benchmark,
//! generate synthetic data, and inspect serialized KAN models.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 runtime failure.

mod config;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use kanselect::baselines::SelectorKind;
use kanselect::data::{ClassificationSpec, RegressionSpec, Task};
use kanselect::kan::KanModel;
use kanselect::pipeline::{self, BenchmarkOptions};
use kanselect::report::{emit, Format};
use kanselect::{importance, Error};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kanselect",
    about = "KAN-based feature selection, classical baselines, and a leakage-safe CV benchmark",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every configured selector on the full dataset (no CV) and write one
    /// importance document per selector.
    Rank(RunArgs),
    /// Run the cross-validated selection-to-prediction benchmark and write
    /// report.json, report.csv, and plotdata.csv.
    Benchmark(RunArgs),
    /// Generate a synthetic dataset CSV plus a ground-truth sidecar.
    Generate(GenerateArgs),
    /// Summarize a serialized KAN model JSON document.
    InspectModel(InspectArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override the worker-thread count (default: config, then
    /// KANSELECT_WORKERS, then all processors).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    /// classification | regression
    #[arg(long)]
    task: String,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    d: usize,
    #[arg(long, default_value_t = 5)]
    informative: usize,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 2.0)]
    class_sep: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path; the ground-truth sidecar lands at <out>.truth.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    /// Path to a KAN model JSON document.
    #[arg(long)]
    model: PathBuf,
}

enum CliFailure {
    Usage(String),
    Runtime(String),
}

impl CliFailure {
    fn code(&self) -> u8 {
        match self {
            CliFailure::Usage(_) => 1,
            CliFailure::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliFailure::Usage(m) | CliFailure::Runtime(m) => m,
        }
    }
}

fn usage_error(e: impl std::fmt::Display) -> CliFailure {
    CliFailure::Usage(e.to_string())
}

fn runtime_error(e: impl std::fmt::Display) -> CliFailure {
    CliFailure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rank(args) => cmd_rank(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Generate(args) => cmd_generate(args),
        Command::InspectModel(args) => cmd_inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

/// Apply flag overrides, set up workers, and load the dataset.
fn prepare(args: &RunArgs) -> Result<(RunConfig, kanselect::data::Dataset, String), CliFailure> {
    let mut config = RunConfig::load(&args.config).map_err(usage_error)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(dir) = &args.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(workers) = args.workers {
        config.workers = Some(workers);
    }
    let workers = config.workers.or_else(|| {
        std::env::var("KANSELECT_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(workers) = workers {
        // Ignore "already initialized": the pool can only be set once per process.
        let _ = pipeline::configure_workers(workers.max(1));
    }
    let hash = config.hash();
    let dataset = config.load_dataset().map_err(runtime_error)?;
    std::fs::create_dir_all(&config.output_dir).map_err(runtime_error)?;
    Ok((config, dataset, hash))
}

#[derive(Serialize)]
struct ImportanceDocument {
    selector: &'static str,
    display_name: &'static str,
    scope: &'static str,
    dataset: String,
    feature_names: Vec<String>,
    scores: Vec<f64>,
    raw_scores: Vec<f64>,
    normalized: bool,
    seed: u64,
    config_hash: String,
}

fn cmd_rank(args: RunArgs) -> Result<(), CliFailure> {
    let (config, dataset, hash) = prepare(&args)?;
    let ranked = pipeline::rank_on_full_dataset(&dataset, &config.selectors, config.seed)
        .map_err(runtime_error)?;
    for (kind, vector) in &ranked {
        let doc = ImportanceDocument {
            selector: kind.id(),
            display_name: kind.display_name(),
            scope: "full-dataset (not cross-validated)",
            dataset: dataset.name.clone(),
            feature_names: dataset.source_names.clone(),
            scores: vector.scores.clone(),
            raw_scores: vector.raw_scores.clone(),
            normalized: vector.normalized,
            seed: config.seed,
            config_hash: hash.clone(),
        };
        let path = config
            .output_dir
            .join(format!("importance_{}.json", kind.id()));
        let bytes = serde_json::to_vec_pretty(&doc).map_err(runtime_error)?;
        std::fs::write(&path, bytes).map_err(runtime_error)?;
        println!("wrote {}", path.display());
    }
    // Persist the full-data KAN backing the coefficient measures, for
    // inspect-model.
    if let Some(spec) = config.selectors.iter().find(|s| s.kind.is_kan()).cloned() {
        let model =
            pipeline::kan_for_dataset(&dataset, &spec, config.seed).map_err(runtime_error)?;
        let path = config.output_dir.join("kan_model.json");
        let bytes = serde_json::to_vec_pretty(&model).map_err(runtime_error)?;
        std::fs::write(&path, bytes).map_err(runtime_error)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_benchmark(args: RunArgs) -> Result<(), CliFailure> {
    let (config, dataset, hash) = prepare(&args)?;
    let plan =
        pipeline::plan_for_dataset(&dataset, config.folds, config.seed).map_err(runtime_error)?;
    // The all-features baseline column is always present exactly once.
    let mut selectors = config.selectors.clone();
    if !selectors.iter().any(|s| s.kind == SelectorKind::AllFeatures) {
        selectors.push(kanselect::baselines::SelectorSpec::of_kind(
            SelectorKind::AllFeatures,
        ));
    }
    let opts = BenchmarkOptions {
        retentions: config.retentions.clone(),
        seed: config.seed,
    };
    let mut report = pipeline::run_benchmark(&dataset, &selectors, &config.predictors, &plan, &opts)
        .map_err(runtime_error)?;
    report.metadata.config_hash = Some(hash);
    let report = kanselect::report::BenchmarkReport::assemble(
        report.metadata.clone(),
        report.cells.clone(),
        report.selections.clone(),
    );

    let total = report.cells.len();
    let failed = report.cells.iter().filter(|c| c.score.is_none()).count();
    if failed > 0 {
        eprintln!("warning: {failed}/{total} cells failed");
    }
    if failed == total {
        return Err(CliFailure::Runtime("every benchmark cell failed".into()));
    }

    for (name, format) in [
        ("report.json", Format::Json),
        ("report.csv", Format::Csv),
        ("plotdata.csv", Format::PlotData),
    ] {
        let bytes = emit(&report, format).map_err(runtime_error)?;
        let path = config.output_dir.join(name);
        std::fs::write(&path, bytes).map_err(runtime_error)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct TruthSidecar {
    informative: Vec<usize>,
    seed: u64,
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliFailure> {
    let dataset = match args.task.as_str() {
        "classification" => kanselect::data::make_classification(&ClassificationSpec {
            n: args.n,
            d: args.d,
            n_informative: args.informative,
            n_classes: args.classes,
            class_sep: args.class_sep,
            seed: args.seed,
        })
        .map_err(usage_error)?,
        "regression" => kanselect::data::make_regression(&RegressionSpec {
            n: args.n,
            d: args.d,
            n_informative: args.informative,
            noise_sd: args.noise_sd,
            seed: args.seed,
        })
        .map_err(usage_error)?,
        other => {
            return Err(CliFailure::Usage(format!(
                "unknown task '{other}' (expected classification or regression)"
            )))
        }
    };

    let mut csv = String::new();
    csv.push_str(&dataset.feature_names.join(","));
    csv.push_str(",target\n");
    for i in 0..dataset.n_samples() {
        for j in 0..dataset.n_encoded() {
            csv.push_str(&format!("{}", dataset.x[[i, j]]));
            csv.push(',');
        }
        match &dataset.y {
            kanselect::data::Target::Regression(v) => csv.push_str(&format!("{}", v[i])),
            kanselect::data::Target::Classification { labels, .. } => {
                csv.push_str(&format!("{}", labels[i]))
            }
        }
        csv.push('\n');
    }
    std::fs::write(&args.out, csv).map_err(runtime_error)?;

    let sidecar = TruthSidecar {
        informative: dataset.informative_ground_truth.clone().unwrap_or_default(),
        seed: args.seed,
    };
    let sidecar_path = PathBuf::from(format!("{}.truth.json", args.out.display()));
    std::fs::write(
        &sidecar_path,
        serde_json::to_vec_pretty(&sidecar).map_err(runtime_error)?,
    )
    .map_err(runtime_error)?;
    println!("wrote {} and {}", args.out.display(), sidecar_path.display());
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> Result<(), CliFailure> {
    let bytes = std::fs::read(&args.model).map_err(usage_error)?;
    let model: KanModel =
        serde_json::from_slice(&bytes).map_err(|e| usage_error(Error::Json(e)))?;
    let task = match model.task() {
        Task::Regression => "regression".to_string(),
        Task::Classification { n_classes } => format!("classification ({n_classes} classes)"),
    };
    println!("task: {task}");
    println!("layers: {}", model.layers().len());
    for (i, layer) in model.layers().iter().enumerate() {
        println!(
            "  layer {i}: {} -> {}, degree {}, basis size {}, activation {:?}",
            layer.input_dim(),
            layer.output_dim(),
            layer.knots()[0].degree(),
            layer.basis_size(),
            layer.activation(),
        );
    }
    let l1 = importance::importance_l1(&model, true);
    let l2 = importance::importance_l2(&model, true);
    println!("feature  l1_importance  l2_importance");
    for j in 0..model.input_dim() {
        println!("{j:>7}  {:>13.6}  {:>13.6}", l1.scores[j], l2.scores[j]);
    }
    Ok(())
}
