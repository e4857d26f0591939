//! Delimited-text dataset loading and the reference dataset registry.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{MidaError, Result};

/// Which field holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    /// Zero-based position; negative values count from the end (`-1` is last).
    Index(i64),
    /// Header name.
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Index(-1)
    }
}

impl FromStr for LabelColumn {
    type Err = MidaError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "last" {
            return Ok(LabelColumn::Index(-1));
        }
        if s == "first" {
            return Ok(LabelColumn::Index(0));
        }
        Ok(match s.parse::<i64>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    /// Comma if the first data line contains one, whitespace otherwise.
    #[default]
    Auto,
    Comma,
    Whitespace,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: LabelColumn,
    /// `None` detects a header from the first line's feature fields.
    pub has_header: Option<bool>,
    pub delimiter: Delimiter,
}

fn split_fields(line: &str, delimiter: Delimiter) -> Vec<String> {
    match delimiter {
        Delimiter::Comma | Delimiter::Auto => line.split(',').map(|f| f.trim().to_string()).collect(),
        Delimiter::Whitespace => line.split_whitespace().map(str::to_string).collect(),
    }
}

fn skip_line(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#') || t.starts_with('@') || t.starts_with('%')
}

fn resolve_index(column: &LabelColumn, header: Option<&[String]>, width: usize, path: &Path) -> Result<usize> {
    let missing = || MidaError::MissingLabelColumn {
        path: path.to_path_buf(),
        column: column.to_string(),
    };
    match column {
        LabelColumn::Index(i) => {
            let idx = if *i < 0 { width as i64 + i } else { *i };
            if idx < 0 || idx as usize >= width {
                return Err(missing());
            }
            Ok(idx as usize)
        }
        LabelColumn::Name(name) => header
            .and_then(|h| h.iter().position(|f| f == name))
            .ok_or_else(missing),
    }
}

/// Sort key that orders numeric labels numerically and the rest lexically.
fn label_order(labels: &mut [String]) {
    let numeric: Option<Vec<f64>> = labels.iter().map(|l| l.parse::<f64>().ok()).collect();
    match numeric {
        Some(_) => labels.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.total_cmp(&y).then_with(|| a.cmp(b))
        }),
        None => labels.sort(),
    }
}

/// Loads a delimited text file. Feature fields must parse as finite reals;
/// label text is mapped to dense codes in ascending label order.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(MidaError::MissingFile { path: path.to_path_buf() });
    }
    let text = fs::read_to_string(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !skip_line(l))
        .peekable();
    let Some(&(_, first)) = lines.peek() else {
        return Err(MidaError::EmptyFile { path: path.to_path_buf() });
    };
    let delimiter = match schema.delimiter {
        Delimiter::Auto if first.contains(',') => Delimiter::Comma,
        Delimiter::Auto => Delimiter::Whitespace,
        d => d,
    };
    let first_fields = split_fields(first, delimiter);
    let width = first_fields.len();

    let has_header = match schema.has_header {
        Some(h) => h,
        None => {
            // A header row has some non-numeric field outside the label column.
            let label_idx = resolve_index(&schema.label_column, Some(&first_fields), width, path).ok();
            first_fields
                .iter()
                .enumerate()
                .any(|(j, f)| Some(j) != label_idx && f.parse::<f64>().is_err())
                || matches!(schema.label_column, LabelColumn::Name(_))
        }
    };
    let header = if has_header {
        lines.next();
        Some(first_fields)
    } else {
        None
    };
    let label_idx = resolve_index(&schema.label_column, header.as_deref(), width, path)?;

    let mut values: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (line_no, line) in lines {
        let fields = split_fields(line, delimiter);
        if fields.len() != width {
            return Err(MidaError::RaggedRow {
                path: path.to_path_buf(),
                line: line_no,
                expected: width,
                found: fields.len(),
            });
        }
        for (j, field) in fields.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(MidaError::NonNumeric {
                        path: path.to_path_buf(),
                        line: line_no,
                        column: j,
                        value: field.clone(),
                    })
                }
            }
        }
        raw_labels.push(fields[label_idx].clone());
    }
    if raw_labels.is_empty() {
        return Err(MidaError::EmptyFile { path: path.to_path_buf() });
    }

    let mut names = raw_labels.clone();
    label_order(&mut names);
    names.dedup();
    let labels: Vec<usize> = raw_labels
        .iter()
        .map(|l| names.iter().position(|n| n == l).expect("label in mapping"))
        .collect();

    let n_features = width - 1;
    let features = DMatrix::from_row_slice(raw_labels.len(), n_features, &values);
    let feature_names = match &header {
        Some(h) => h
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != label_idx)
            .map(|(_, n)| n.clone())
            .collect(),
        None => (0..n_features).map(|j| format!("f{j}")).collect(),
    };
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "custom".to_string());
    Dataset::with_names(name, features, labels, feature_names, names)
}

/// Writes `dataset` as comma-separated text with a header and the label in
/// the last column. Reals use the shortest representation that parses back
/// to the same value.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    let mut header = dataset.feature_names.join(",");
    header.push_str(",label");
    writeln!(out, "{header}")?;
    let x = dataset.features();
    for i in 0..dataset.n_samples() {
        let mut row: Vec<String> = (0..dataset.n_features()).map(|j| format!("{}", x[(i, j)])).collect();
        row.push(dataset.label_names[dataset.labels()[i]].clone());
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub features: usize,
    pub classes: usize,
    pub samples: usize,
}

/// Shapes of the reference benchmark datasets.
pub const REGISTRY: [RegistryEntry; 6] = [
    RegistryEntry { name: "letter", features: 16, classes: 26, samples: 20000 },
    RegistryEntry { name: "libras", features: 90, classes: 15, samples: 360 },
    RegistryEntry { name: "wall-following", features: 24, classes: 4, samples: 5456 },
    RegistryEntry { name: "madelon", features: 500, classes: 2, samples: 2600 },
    RegistryEntry { name: "hill-valley-noise", features: 100, classes: 2, samples: 1212 },
    RegistryEntry { name: "hill-valley-clean", features: 100, classes: 2, samples: 1212 },
];

pub fn registry_entry(name: &str) -> Option<&'static RegistryEntry> {
    REGISTRY.iter().find(|e| e.name == name)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub name: String,
    pub registered: bool,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Compares the dataset's shape against its registry entry. Mismatches are
/// warnings; `custom` datasets are not checked.
pub fn registry_check(dataset: &Dataset) -> ValidationReport {
    let mut warnings = Vec::new();
    let entry = registry_entry(&dataset.name);
    match entry {
        Some(e) => {
            let found = [dataset.n_features(), dataset.n_classes(), dataset.n_samples()];
            let expected = [e.features, e.classes, e.samples];
            for ((what, f), x) in ["features", "classes", "samples"].iter().zip(found).zip(expected) {
                if f != x {
                    warnings.push(format!("{}: expected {x} {what}, found {f}", e.name));
                }
            }
        }
        None if dataset.name == "custom" => {}
        None => warnings.push(format!("{}: not a registered dataset name", dataset.name)),
    }
    ValidationReport {
        name: dataset.name.clone(),
        registered: entry.is_some(),
        warnings,
    }
}

/// Default location for registry datasets: `<dir>/<name>.csv`.
pub fn registry_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.csv"))
}
