//! End-to-end experiment runner and report writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{self, CsvSchema, Delimiter, LabelColumn, ValidationReport};
use crate::dataset::{Dataset, LabelMapping};
use crate::error::{MidaError, Result};
use crate::eval::{self, AccuracyTable, CvConfig, Method, Normalization};
use crate::mi::HistogramSpec;
use crate::mida::{MidaConfig, DEFAULT_CT_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = MidaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(MidaError::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    /// Registry name used for shape checks and report labels.
    pub name: String,
    pub label_column: LabelColumn,
    pub has_header: Option<bool>,
    pub methods: Vec<Method>,
    pub dims: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
    pub bins: usize,
    pub ct_max: u32,
    pub normalization: Normalization,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
}

impl ExperimentConfig {
    pub fn new(data: impl Into<PathBuf>, name: impl Into<String>) -> Self {
        Self {
            data: data.into(),
            name: name.into(),
            label_column: LabelColumn::default(),
            has_header: None,
            methods: Method::ALL.to_vec(),
            dims: (1..=7).collect(),
            folds: 10,
            seed: 0,
            bins: HistogramSpec::DEFAULT_BINS,
            ct_max: DEFAULT_CT_MAX,
            normalization: Normalization::PerFeature,
            out: None,
            format: ReportFormat::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(MidaError::InvalidArgument("dims must be non-empty and each at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(MidaError::InvalidArgument("at least one method is required".into()));
        }
        if self.folds < 2 {
            return Err(MidaError::InvalidArgument("folds must be at least 2".into()));
        }
        HistogramSpec::new(self.bins)?;
        Ok(())
    }

    pub fn cv_config(&self) -> Result<CvConfig> {
        Ok(CvConfig {
            folds: self.folds,
            seed: self.seed,
            normalization: self.normalization,
            mida: MidaConfig {
                spec: HistogramSpec::new(self.bins)?,
                ct_max: self.ct_max,
                ..MidaConfig::default()
            },
            ..CvConfig::default()
        })
    }

    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            label_column: self.label_column.clone(),
            has_header: self.has_header,
            delimiter: Delimiter::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub label_mapping: Vec<LabelMapping>,
    pub validation: ValidationReport,
}

/// One report line. `fold` is the fold index, or `mean` for aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub method: Method,
    pub dim: usize,
    pub fold: String,
    pub accuracy: Option<f64>,
    pub seed: u64,
    pub bins: usize,
    pub ct_max: u32,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: ReportMeta,
    pub records: Vec<ReportRow>,
    pub aggregates: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub report: Report,
    pub table: AccuracyTable,
    pub grid: String,
}

/// Loads a dataset the way the experiment runner does, naming it after the
/// registry entry.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let mut dataset = data::load_csv(&config.data, &config.schema())?;
    dataset.name = config.name.clone();
    Ok(dataset)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let dataset = load_dataset(config)?;
    let outcome = run_on_dataset(config, &dataset)?;
    if let Some(out) = &config.out {
        write_outputs(&outcome, config, out)?;
    }
    Ok(outcome)
}

/// Runs every requested method on an already-loaded dataset.
pub fn run_on_dataset(config: &ExperimentConfig, dataset: &Dataset) -> Result<ExperimentOutcome> {
    config.validate()?;
    let cv = config.cv_config()?;
    let plan = eval::stratified_folds(dataset.labels(), cv.folds, cv.seed)?;
    let tables = config
        .methods
        .iter()
        .map(|&m| eval::run_cv_plan(dataset, m, &config.dims, &plan, &cv))
        .collect::<Result<Vec<_>>>()?;
    let table = AccuracyTable::merge(tables);

    let row = |method, dim, fold: String, accuracy, skipped| ReportRow {
        dataset: dataset.name.clone(),
        method,
        dim,
        fold,
        accuracy,
        seed: config.seed,
        bins: config.bins,
        ct_max: config.ct_max,
        skipped,
    };
    let records = table
        .records
        .iter()
        .map(|r| row(r.method, r.dim, r.fold.to_string(), r.accuracy, r.skipped))
        .collect();
    let aggregates = table
        .aggregates
        .iter()
        .map(|a| row(a.method, a.dim, "mean".to_string(), a.mean_accuracy, a.skipped))
        .collect();

    let report = Report {
        meta: ReportMeta {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            dataset: DatasetSummary {
                name: dataset.name.clone(),
                samples: dataset.n_samples(),
                features: dataset.n_features(),
                classes: dataset.n_classes(),
            },
            label_mapping: dataset.label_mapping(),
            validation: data::registry_check(dataset),
        },
        records,
        aggregates,
    };
    let grid = render_grid(&table, &config.methods, &config.dims);
    Ok(ExperimentOutcome { report, table, grid })
}

/// Dimensions as rows, methods as columns, mean accuracy in percent with one
/// decimal; `-` marks skipped cells.
pub fn render_grid(table: &AccuracyTable, methods: &[Method], dims: &[usize]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>5}", "dim");
    for m in methods {
        let _ = write!(out, " {:>7}", m.as_str().to_uppercase());
    }
    out.push('\n');
    for &d in dims {
        let _ = write!(out, "{d:>5}");
        for &m in methods {
            let cell = match table.mean(m, d) {
                Some(acc) if !table.is_skipped(m, d) => format!("{:.1}", acc * 100.0),
                _ => "-".to_string(),
            };
            let _ = write!(out, " {cell:>7}");
        }
        out.push('\n');
    }
    out
}

fn csv_report(report: &Report) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["dataset", "method", "dim", "fold", "accuracy", "seed", "bins", "ct_max", "skipped"])?;
    for r in report.records.iter().chain(&report.aggregates) {
        writer.write_record([
            r.dataset.clone(),
            r.method.to_string(),
            r.dim.to_string(),
            r.fold.clone(),
            r.accuracy.map(|a| a.to_string()).unwrap_or_default(),
            r.seed.to_string(),
            r.bins.to_string(),
            r.ct_max.to_string(),
            r.skipped.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| MidaError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes the report at `out`, plus `<out>.grid.txt`. CSV reports also get a
/// `<out>.meta.json` with the run metadata.
pub fn write_outputs(outcome: &ExperimentOutcome, config: &ExperimentConfig, out: &Path) -> Result<()> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    match config.format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(&outcome.report)?;
            text.push('\n');
            fs::write(out, text)?;
        }
        ReportFormat::Csv => {
            fs::write(out, csv_report(&outcome.report)?)?;
            let mut meta = serde_json::to_string_pretty(&outcome.report.meta)?;
            meta.push('\n');
            fs::write(sidecar(out, ".meta.json"), meta)?;
        }
    }
    fs::write(sidecar(out, ".grid.txt"), &outcome.grid)?;
    Ok(())
}
