//! Pairwise method comparison over per-replicate CV-AUC values.
//!
//! For a row method `R` and a column method `C`, `a` counts the datasets
//! where `C`'s mean CV-AUC is strictly higher than `R`'s, and `b` the subset
//! where a one-sided signed-rank test over paired replicates (`C` greater)
//! has `p < alpha`. An overall two-sided test compares the per-dataset means.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::benchmark::ReplicateResult;
use crate::error::{Error, Result};
use crate::stats::{wilcoxon_signed_rank, Alternative, PairedSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateValue {
    pub dataset: String,
    pub replicate: usize,
    pub method: String,
    pub cv_auc: f64,
}

impl From<&ReplicateResult> for ReplicateValue {
    fn from(r: &ReplicateResult) -> Self {
        ReplicateValue {
            dataset: r.dataset.clone(),
            replicate: r.replicate,
            method: r.method.display_name().into(),
            cv_auc: r.cv_auc,
        }
    }
}

/// Reads the `dataset, replicate, method, cv_auc` columns; others are
/// ignored.
pub fn read_replicates_csv<R: Read>(input: R) -> Result<Vec<ReplicateValue>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in reader.deserialize() {
        let row: ReplicateValue = rec?;
        if !row.cv_auc.is_finite() {
            return Err(Error::InvalidDataset(format!(
                "non-finite cv_auc for {} / {}",
                row.dataset, row.method
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub row: String,
    pub col: String,
    pub a: usize,
    pub b: usize,
    /// Datasets with equal means.
    pub ties: usize,
    /// Datasets in `a` with fewer than two paired replicates.
    pub flagged: usize,
    pub datasets: usize,
    pub overall_statistic: f64,
    pub overall_p: f64,
}

impl PairComparison {
    /// `a(b)`, starred when the overall test is significant.
    pub fn cell(&self, alpha: f64) -> String {
        let star = if self.overall_p < alpha { "*" } else { "" };
        format!("{}({}){}", self.a, self.b, star)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub alpha: f64,
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    pub pairs: Vec<PairComparison>,
}

impl ComparisonTable {
    pub fn pair(&self, row: &str, col: &str) -> Option<&PairComparison> {
        self.pairs.iter().find(|p| p.row == row && p.col == col)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "row", "col", "a", "b", "ties", "flagged", "datasets", "overall_statistic", "overall_p", "cell",
        ])?;
        for p in &self.pairs {
            w.write_record([
                p.row.as_str(),
                &p.col,
                &p.a.to_string(),
                &p.b.to_string(),
                &p.ties.to_string(),
                &p.flagged.to_string(),
                &p.datasets.to_string(),
                &p.overall_statistic.to_string(),
                &p.overall_p.to_string(),
                &p.cell(self.alpha),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    /// Square `a(b)` matrix.
    pub fn render(&self) -> String {
        let width = self.methods.iter().map(String::len).max().unwrap_or(0).max(8);
        let mut out = format!("{:width$}", "");
        for m in &self.methods {
            out.push_str(&format!("  {m:>width$}"));
        }
        out.push('\n');
        for r in &self.methods {
            out.push_str(&format!("{r:width$}"));
            for c in &self.methods {
                let cell = self.pair(r, c).map(|p| p.cell(self.alpha)).unwrap_or_else(|| "-".into());
                out.push_str(&format!("  {cell:>width$}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Methods appear in order of first occurrence in `rows`.
pub fn run_pairwise_comparison(rows: &[ReplicateValue], alpha: f64) -> Result<ComparisonTable> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut methods: Vec<String> = Vec::new();
    let mut datasets: Vec<String> = Vec::new();
    // (dataset, method) -> replicate -> value
    let mut values: BTreeMap<(String, String), BTreeMap<usize, f64>> = BTreeMap::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
        values
            .entry((r.dataset.clone(), r.method.clone()))
            .or_default()
            .insert(r.replicate, r.cv_auc);
    }
    if methods.len() < 2 {
        return Err(Error::InvalidDataset("comparison needs at least two methods".into()));
    }
    let mean_of = |d: &str, m: &str| -> Option<f64> {
        let v = values.get(&(d.to_string(), m.to_string()))?;
        Some(v.values().sum::<f64>() / v.len() as f64)
    };
    let mut pairs = Vec::new();
    for row in &methods {
        for col in &methods {
            if row == col {
                continue;
            }
            let (mut a, mut b, mut ties, mut flagged) = (0, 0, 0, 0);
            let (mut col_means, mut row_means) = (Vec::new(), Vec::new());
            for d in &datasets {
                let (Some(mr), Some(mc)) = (mean_of(d, row), mean_of(d, col)) else {
                    continue;
                };
                row_means.push(mr);
                col_means.push(mc);
                if mc == mr {
                    ties += 1;
                }
                if mc <= mr {
                    continue;
                }
                a += 1;
                let vr = &values[&(d.clone(), row.clone())];
                let vc = &values[&(d.clone(), col.clone())];
                let (x, y): (Vec<f64>, Vec<f64>) = vc
                    .iter()
                    .filter_map(|(rep, &c)| vr.get(rep).map(|&r| (c, r)))
                    .unzip();
                if x.len() < 2 {
                    flagged += 1;
                    continue;
                }
                let test = wilcoxon_signed_rank(&PairedSample::new(x, y)?, Alternative::Greater);
                if test.p_value < alpha {
                    b += 1;
                }
            }
            let overall = if col_means.is_empty() {
                None
            } else {
                Some(wilcoxon_signed_rank(
                    &PairedSample::new(col_means.clone(), row_means)?,
                    Alternative::TwoSided,
                ))
            };
            pairs.push(PairComparison {
                row: row.clone(),
                col: col.clone(),
                a,
                b,
                ties,
                flagged,
                datasets: col_means.len(),
                overall_statistic: overall.map_or(0.0, |t| t.statistic),
                overall_p: overall.map_or(1.0, |t| t.p_value),
            });
        }
    }
    Ok(ComparisonTable {
        alpha,
        methods,
        datasets,
        pairs,
    })
}
