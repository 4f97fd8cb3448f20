//! Binary-outcome datasets, CSV ingestion and stratified folds.
//!
//! Label `1` is the positive class and, by convention, the minority class.
//! Features are stored column-major because split search scans one column
//! at a time.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::SeedSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    /// Column `j` occupies `columns[j * n..(j + 1) * n]`.
    columns: Vec<f64>,
    labels: Vec<u8>,
    names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from column-major storage.
    pub fn from_columns(columns: Vec<Vec<f64>>, labels: Vec<u8>, names: Vec<String>) -> Result<Self> {
        let p = columns.len();
        let n = labels.len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidDataset(
                "every column must have one value per label".into(),
            ));
        }
        let flat = columns.into_iter().flatten().collect();
        Self::from_flat(n, p, flat, labels, names)
    }

    /// Builds a dataset from row-major data; names default to `X1..Xp`.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u8>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidDataset("ragged rows".into()));
        }
        let n = rows.len();
        let mut flat = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                flat[j * n + i] = v;
            }
        }
        Self::from_flat(n, p, flat, labels, default_names(p))
    }

    fn from_flat(n: usize, p: usize, columns: Vec<f64>, labels: Vec<u8>, names: Vec<String>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDataset(format!("need at least 2 rows, got {n}")));
        }
        if p < 1 {
            return Err(Error::InvalidDataset("need at least one feature".into()));
        }
        if names.len() != p {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {p} features",
                names.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|nm| !seen.insert(nm.as_str())) {
            return Err(Error::InvalidDataset(format!("duplicate feature name `{dup}`")));
        }
        if let Some(pos) = columns.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value in column `{}` row {}",
                names[pos / n],
                pos % n
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidDataset(format!("label {bad} is not 0/1")));
        }
        let n1 = labels.iter().filter(|&&y| y == 1).count();
        if n1 == 0 || n1 == n {
            return Err(Error::InvalidDataset("both classes must be present".into()));
        }
        Ok(Dataset {
            n,
            p,
            columns,
            labels,
            names,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.columns[feature * self.n + row]
    }

    #[inline]
    pub fn column(&self, feature: usize) -> &[f64] {
        &self.columns[feature * self.n..(feature + 1) * self.n]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        (0..self.p).map(|j| self.value(row, j)).collect()
    }

    #[inline]
    pub fn label(&self, row: usize) -> u8 {
        self.labels[row]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    /// `(n0, n1)`: majority-class and minority-class counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let n1 = self.labels.iter().filter(|&&y| y == 1).count();
        (self.n - n1, n1)
    }

    /// Dataset restricted to `rows` (duplicates allowed, order kept).
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let m = rows.len();
        let mut columns = Vec::with_capacity(m * self.p);
        for j in 0..self.p {
            let col = self.column(j);
            columns.extend(rows.iter().map(|&i| col[i]));
        }
        let labels = rows.iter().map(|&i| self.labels[i]).collect();
        Self::from_flat(m, self.p, columns, labels, self.names.clone())
    }

    /// Dataset restricted to the given feature columns, in the given order.
    pub fn select_columns(&self, features: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = features.iter().find(|&&j| j >= self.p) {
            return Err(Error::InvalidDataset(format!("feature index {bad} >= p={}", self.p)));
        }
        let mut columns = Vec::with_capacity(features.len() * self.n);
        for &j in features {
            columns.extend_from_slice(self.column(j));
        }
        let names = features.iter().map(|&j| self.names[j].clone()).collect();
        Self::from_flat(self.n, features.len(), columns, self.labels.clone(), names)
    }

    /// Writes the dataset as CSV with the label as the last column (`0`/`1`).
    pub fn write_csv(&self, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file, label_column)
    }

    pub fn write_csv_to<W: Write>(&self, out: W, label_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.names.iter().map(String::as_str).collect();
        header.push(label_column);
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.p + 1);
        for i in 0..self.n {
            record.clear();
            record.extend((0..self.p).map(|j| self.value(i, j).to_string()));
            record.push(self.labels[i].to_string());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

pub(crate) fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("X{j}")).collect()
}

/// Majority-to-minority ratio `n0 / n1`.
///
/// Below 1 when the user mapped the larger class to label 1.
pub fn imbalance_ratio(dataset: &Dataset) -> f64 {
    let (n0, n1) = dataset.class_counts();
    n0 as f64 / n1 as f64
}

/// How non-numeric feature columns are turned into numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncodingPolicy {
    /// One indicator column `name=level` per level.
    #[default]
    OneHot,
    /// Levels mapped to `0, 1, 2, ...` in lexicographic order.
    Integer,
}

impl FromStr for EncodingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-hot" | "onehot" => Ok(EncodingPolicy::OneHot),
            "integer" => Ok(EncodingPolicy::Integer),
            other => Err(Error::UnknownName {
                kind: "encoding policy",
                name: other.into(),
            }),
        }
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "N/A" | "na" | "?" | "NaN" | "nan" | "null" | "NULL")
}

/// Reads a headed CSV file into a [`Dataset`].
///
/// Rows with any missing cell (`""`, `NA`, `?`, `NaN`, ...) are dropped and
/// the count is logged. A column is numeric when every surviving cell parses
/// as a finite number; other columns are encoded per `encoding`.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    positive_label: &str,
    encoding: EncodingPolicy,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::MissingHeader { path: path.into() });
    }
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn {
            column: label_column.into(),
        })?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut dropped = 0usize;
    let mut label_values = BTreeSet::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::RaggedRow {
                // 1-based line number, header is line 1
                row: k + 2,
                expected: header.len(),
                found: rec.len(),
            });
        }
        let label = &rec[label_idx];
        if !is_missing(label) {
            label_values.insert(label.to_owned());
        }
        if rec.iter().any(is_missing) {
            dropped += 1;
            continue;
        }
        rows.push(rec.iter().map(str::to_owned).collect());
    }
    if label_values.len() != 2 {
        return Err(Error::NonBinaryLabel {
            column: label_column.into(),
            found: label_values.len(),
        });
    }
    if !label_values.contains(positive_label) {
        return Err(Error::PositiveLabelAbsent {
            column: label_column.into(),
            label: positive_label.into(),
        });
    }
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} row(s) with missing cells", path.display());
    }
    if rows.is_empty() {
        return Err(Error::NoRows { dropped });
    }

    let n = rows.len();
    let labels: Vec<u8> = rows
        .iter()
        .map(|r| u8::from(r[label_idx] == positive_label))
        .collect();

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if c == label_idx {
            continue;
        }
        let parsed: Option<Vec<f64>> = rows
            .iter()
            .map(|r| r[c].parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        if let Some(values) = parsed {
            columns.push(values);
            names.push(name.clone());
            continue;
        }
        let levels: BTreeMap<&str, usize> = rows
            .iter()
            .map(|r| r[c].as_str())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(code, level)| (level, code))
            .collect();
        match encoding {
            EncodingPolicy::Integer => {
                columns.push(rows.iter().map(|r| levels[r[c].as_str()] as f64).collect());
                names.push(name.clone());
            }
            EncodingPolicy::OneHot => {
                for level in levels.keys() {
                    columns.push(
                        rows.iter()
                            .map(|r| if r[c] == *level { 1.0 } else { 0.0 })
                            .collect(),
                    );
                    names.push(format!("{name}={level}"));
                }
            }
        }
    }
    if columns.is_empty() {
        return Err(Error::InvalidDataset("no feature columns besides the label".into()));
    }
    debug_assert!(columns.iter().all(|c| c.len() == n));
    let ds = Dataset::from_columns(columns, labels, names)?;
    let (n0, n1) = ds.class_counts();
    if n1 > n0 {
        log::warn!(
            "positive label `{positive_label}` is the majority class ({n1} vs {n0}); imbalance ratio < 1"
        );
    }
    Ok(ds)
}

/// Stratified fold membership. Folds are numbered `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_of: Vec<usize>,
    pub k: usize,
}

impl FoldAssignment {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }
}

/// Assigns rows to `k` folds so that each class is spread round-robin over
/// the folds after a seeded shuffle. Minority rows are dealt first and the
/// majority deal continues where the minority deal stopped, so both the
/// per-class and the total fold sizes differ by at most one.
///
/// Requires `2 <= k <= n / 2` so every fold holds at least two rows. A fold
/// receives a minority row only when `k <= n1`; callers that score held-out
/// AUC must check that themselves.
pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: SeedSpec) -> Result<FoldAssignment> {
    let max = dataset.n() / 2;
    if k < 2 || k > max {
        return Err(Error::FoldCount { k, max });
    }
    let mut rng = seed.rng();
    let mut fold_of = vec![0usize; dataset.n()];
    let mut next = 0usize;
    for class in [1u8, 0u8] {
        let mut idx: Vec<usize> = (0..dataset.n())
            .filter(|&i| dataset.label(i) == class)
            .collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold_of[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldAssignment { fold_of, k })
}
