use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mida::data::LabelColumn;
use mida::eval::{normalize_with, Method, Normalization};
use mida::experiment::{self, ExperimentConfig, ReportFormat};
use mida::mi::HistogramSpec;
use mida::mida::{CtSweep, MidaConfig, DEFAULT_CT_MAX};
use mida::{Dataset, MidaError};

#[derive(Parser)]
#[command(name = "mida", version, about = "Mutual information discriminant analysis benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validate extractors with 1-NN and write a report.
    Run(RunArgs),
    /// Print the mutual information profile and the ct curve of a dataset.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    /// Registry name (letter, libras, wall-following, madelon,
    /// hill-valley-noise, hill-valley-clean) or `custom`.
    #[arg(long, default_value = "custom")]
    name: String,
    /// Label column: zero-based index, negative from the end, `last`, or a header name.
    #[arg(long, default_value = "last")]
    label_col: LabelColumn,
    /// Treat the first line as a header (detected when omitted).
    #[arg(long)]
    header: Option<bool>,
    #[arg(long, default_value_t = HistogramSpec::DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = DEFAULT_CT_MAX)]
    ct_max: u32,
    #[arg(long, default_value = "per-feature")]
    norm: Normalization,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_delimiter = ',', default_value = "raw,pca,lda,mida")]
    methods: Vec<Method>,
    /// Comma-separated list and/or ranges such as `1-7`.
    #[arg(long, default_value = "1-7", value_parser = parse_dims)]
    dims: Dims,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Output dimension whose K curve is reported.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Debug)]
struct Dims(Vec<usize>);

fn parse_dims(s: &str) -> Result<Dims, String> {
    let mut dims = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                let hi: usize = hi.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                if lo > hi {
                    return Err(format!("empty range {part}"));
                }
                dims.extend(lo..=hi);
            }
            None => dims.push(part.parse().map_err(|e| format!("{part}: {e}"))?),
        }
    }
    Ok(Dims(dims))
}

fn experiment_config(args: &RunArgs) -> ExperimentConfig {
    ExperimentConfig {
        label_column: args.data.label_col.clone(),
        has_header: args.data.header,
        methods: args.methods.clone(),
        dims: args.dims.0.clone(),
        folds: args.folds,
        seed: args.seed,
        bins: args.data.bins,
        ct_max: args.data.ct_max,
        normalization: args.data.norm,
        out: args.out.clone(),
        format: args.format,
        ..ExperimentConfig::new(&args.data.data, &args.data.name)
    }
}

fn run(args: RunArgs) -> Result<(), MidaError> {
    let config = experiment_config(&args);
    let outcome = experiment::run_experiment(&config)?;
    for warning in &outcome.report.meta.validation.warnings {
        eprintln!("warning: {warning}");
    }
    print!("{}", outcome.grid);
    Ok(())
}

#[derive(Serialize)]
struct Inspection {
    dataset: String,
    samples: usize,
    features: usize,
    classes: usize,
    bins: usize,
    relevance: Vec<f64>,
    redundancy: Vec<Vec<f64>>,
    dim: usize,
    ct_opt: u32,
    k_curve: Vec<f64>,
}

fn inspect(args: InspectArgs) -> Result<(), MidaError> {
    let mut config = ExperimentConfig::new(&args.data.data, &args.data.name);
    config.label_column = args.data.label_col.clone();
    config.has_header = args.data.header;
    let loaded = experiment::load_dataset(&config)?;
    let (scaled, _, _) = normalize_with(loaded.features(), loaded.features(), args.data.norm)?;
    let dataset: Dataset = loaded.with_features(scaled)?;

    let mida_config = MidaConfig {
        spec: HistogramSpec::new(args.data.bins)?,
        ct_max: args.data.ct_max,
        ..MidaConfig::default()
    };
    let sweep = CtSweep::run(&dataset, args.dim, &mida_config)?;
    let (ct_opt, k_curve) = sweep.select(args.dim)?;
    let n = dataset.n_features();
    let redundancy = (0..n)
        .map(|i| (0..n).map(|j| sweep.profile.redundancy[(i, j)]).collect())
        .collect();
    let report = Inspection {
        dataset: dataset.name.clone(),
        samples: dataset.n_samples(),
        features: n,
        classes: dataset.n_classes(),
        bins: args.data.bins,
        relevance: sweep.profile.relevance.clone(),
        redundancy,
        dim: args.dim,
        ct_opt,
        k_curve,
    };

    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    println!(
        "{}: {} samples, {} features, {} classes, {} bins",
        report.dataset, report.samples, report.features, report.classes, report.bins
    );
    println!("\nrelevance I(f;C) in bits");
    for (j, r) in report.relevance.iter().enumerate() {
        println!("{:>5} {:>12} {r:.6}", j, dataset.feature_names[j]);
    }
    println!("\nredundancy I(f_i;f_j) in bits (diagonal: entropy)");
    for row in &report.redundancy {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
        println!("{}", cells.join(" "));
    }
    println!("\nK at dim {} by ct", report.dim);
    for (ct, k) in report.k_curve.iter().enumerate() {
        let mark = if ct as u32 == report.ct_opt { " *" } else { "" };
        println!("{ct:>5} {k:.6}{mark}");
    }
    println!("ct_opt = {}", report.ct_opt);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Inspect(args) => inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
