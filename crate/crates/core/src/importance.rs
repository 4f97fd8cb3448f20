//! Variable importance: mean Gini decrease and out-of-bag permutation
//! importance measured with accuracy or AUC, plus per-variable confidence
//! intervals over the per-tree differences.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::forest::{fit_forest, Forest, ForestConfig, Sampling};
use crate::metrics::{accuracy, auc_with};
use crate::seed::{tag, SeedSpec};
use crate::tree::Tree;

pub const DEFAULT_U: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImportanceMethod {
    Gini,
    PermAccu,
    PermAuc,
    PermAucUnder,
    PermAucOver,
}

impl ImportanceMethod {
    pub const ALL: [ImportanceMethod; 5] = [
        ImportanceMethod::Gini,
        ImportanceMethod::PermAccu,
        ImportanceMethod::PermAuc,
        ImportanceMethod::PermAucUnder,
        ImportanceMethod::PermAucOver,
    ];

    /// Command-line spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            ImportanceMethod::Gini => "gini",
            ImportanceMethod::PermAccu => "perm-accu",
            ImportanceMethod::PermAuc => "perm-auc",
            ImportanceMethod::PermAucUnder => "perm-auc-under",
            ImportanceMethod::PermAucOver => "perm-auc-over",
        }
    }

    /// Label used in tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ImportanceMethod::Gini => "Gini",
            ImportanceMethod::PermAccu => "perm_ACCU",
            ImportanceMethod::PermAuc => "perm_AUC",
            ImportanceMethod::PermAucUnder => "perm_AUC+Under",
            ImportanceMethod::PermAucOver => "perm_AUC+Over",
        }
    }

    pub fn sampling(self) -> Sampling {
        match self {
            ImportanceMethod::PermAucUnder => Sampling::Under,
            ImportanceMethod::PermAucOver => Sampling::Over,
            _ => Sampling::None,
        }
    }

    /// `None` for Gini.
    pub fn metric(self) -> Option<Metric> {
        match self {
            ImportanceMethod::Gini => None,
            ImportanceMethod::PermAccu => Some(Metric::Accuracy),
            _ => Some(Metric::Auc),
        }
    }

    /// The permutation-AUC method that goes with a sampling mode.
    pub fn perm_auc_for(sampling: Sampling) -> Self {
        match sampling {
            Sampling::None => ImportanceMethod::PermAuc,
            Sampling::Under => ImportanceMethod::PermAucUnder,
            Sampling::Over => ImportanceMethod::PermAucOver,
        }
    }
}

impl FromStr for ImportanceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ImportanceMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s || m.display_name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "importance method",
                name: s.into(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Accuracy at threshold 0.5.
    Accuracy,
    Auc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    /// Fewer than two values: the interval is `[mean, mean]`.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRecord {
    pub variable: usize,
    pub name: String,
    pub value: f64,
    /// One entry per tree; `None` for a skipped tree. Empty for Gini.
    pub per_tree_diffs: Vec<Option<f64>>,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub ci_degenerate: bool,
    pub skipped_trees: usize,
}

impl ImportanceRecord {
    pub fn retained_diffs(&self) -> Vec<f64> {
        self.per_tree_diffs.iter().flatten().copied().collect()
    }

    fn from_diffs(variable: usize, name: String, diffs: Vec<Option<f64>>, u: f64) -> Self {
        let retained: Vec<f64> = diffs.iter().flatten().copied().collect();
        let value = mean(&retained);
        let ci = importance_interval(&retained, u);
        ImportanceRecord {
            variable,
            name,
            value,
            skipped_trees: diffs.len() - retained.len(),
            per_tree_diffs: diffs,
            ci_lower: ci.lower,
            ci_upper: ci.upper,
            ci_degenerate: ci.degenerate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub method: ImportanceMethod,
    pub records: Vec<ImportanceRecord>,
    pub forest_config: ForestConfig,
    pub u: f64,
}

impl ImportanceReport {
    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.value).collect()
    }

    /// Recomputes every interval with a new `u`.
    #[must_use]
    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        if !self.records.iter().all(|r| r.per_tree_diffs.is_empty()) {
            for r in &mut self.records {
                let ci = importance_interval(&r.retained_diffs(), u);
                r.ci_lower = ci.lower;
                r.ci_upper = ci.upper;
                r.ci_degenerate = ci.degenerate;
            }
        }
        self
    }

    /// Variable indices by descending value, ties by ascending index.
    pub fn ranking(&self) -> Vec<usize> {
        rank_descending(&self.values())
    }

    /// Columns: variable, name, method, value, ci_lower, ci_upper,
    /// skipped_trees.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["variable", "name", "method", "value", "ci_lower", "ci_upper", "skipped_trees"])?;
        for r in &self.records {
            w.write_record([
                r.variable.to_string(),
                r.name.clone(),
                self.method.as_str().to_string(),
                r.value.to_string(),
                r.ci_lower.to_string(),
                r.ci_upper.to_string(),
                r.skipped_trees.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

/// Indices sorted by descending value, ties by ascending index.
pub fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// `mean ± u * sd / sqrt(k)` over the `k` retained per-tree differences,
/// with `sd` the sample standard deviation.
pub fn importance_interval(diffs: &[f64], u: f64) -> Interval {
    let m = mean(diffs);
    let k = diffs.len();
    if k < 2 {
        return Interval {
            lower: m,
            upper: m,
            degenerate: true,
        };
    }
    let var = diffs.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (k - 1) as f64;
    let half = u * var.sqrt() / (k as f64).sqrt();
    Interval {
        lower: m - half,
        upper: m + half,
        degenerate: false,
    }
}

/// Mean over trees of the summed impurity decreases per variable. Intervals
/// are degenerate at the value.
pub fn gini_importance(forest: &Forest) -> ImportanceReport {
    let p = forest.n_features();
    let mut totals = vec![0.0; p];
    for tree in forest.trees() {
        for (t, d) in totals.iter_mut().zip(tree.impurity_decrease_by_feature(p)) {
            *t += d;
        }
    }
    let ntree = forest.trees().len() as f64;
    let records = totals
        .into_iter()
        .enumerate()
        .map(|(j, total)| {
            let value = total / ntree;
            ImportanceRecord {
                variable: j,
                name: forest.feature_names()[j].clone(),
                value,
                per_tree_diffs: Vec::new(),
                ci_lower: value,
                ci_upper: value,
                ci_degenerate: true,
                skipped_trees: 0,
            }
        })
        .collect();
    ImportanceReport {
        method: ImportanceMethod::Gini,
        records,
        forest_config: *forest.config(),
        u: DEFAULT_U,
    }
}

/// Seed of the shuffle applied to `variable` in `tree`.
pub fn permutation_stream(seed: SeedSpec, tree: usize, variable: usize) -> SeedSpec {
    seed.derive2(tree as u64, variable as u64)
}

fn metric_value(metric: Metric, scores: &[f64], labels: &[u8], scratch: &mut Vec<(f64, u8)>) -> f64 {
    match metric {
        Metric::Accuracy => accuracy(scores, labels, 0.5),
        Metric::Auc => auc_with(scores, labels, scratch).expect("class mix checked before scoring"),
    }
}

/// Metric drop for one tree when the out-of-bag values of `variable` are
/// rearranged: the `k`-th out-of-bag unit receives the value of unit
/// `permutation[k]`. `unit_rows` maps units to dataset rows. Returns `None`
/// when the tree is skipped.
pub fn tree_permutation_diff(
    tree: &Tree,
    dataset: &Dataset,
    unit_rows: &[usize],
    variable: usize,
    metric: Metric,
    permutation: &[usize],
) -> Option<f64> {
    let oob = OobView::new(tree, dataset, unit_rows, metric)?;
    let mut scratch = Vec::new();
    let base = metric_value(metric, &oob.base, &oob.labels, &mut scratch);
    Some(base - oob.permuted_metric(tree, dataset, variable, metric, permutation, &mut scratch))
}

struct OobView {
    rows: Vec<usize>,
    labels: Vec<u8>,
    base: Vec<f64>,
}

impl OobView {
    fn new(tree: &Tree, dataset: &Dataset, unit_rows: &[usize], metric: Metric) -> Option<Self> {
        let rows: Vec<usize> = tree.oob().iter().map(|&u| unit_rows[u]).collect();
        let labels: Vec<u8> = rows.iter().map(|&r| dataset.label(r)).collect();
        let positives = labels.iter().filter(|&&y| y == 1).count();
        let computable = match metric {
            Metric::Accuracy => !rows.is_empty(),
            Metric::Auc => positives > 0 && positives < labels.len(),
        };
        if !computable {
            return None;
        }
        let base = rows.iter().map(|&r| tree.predict_row(dataset, r)).collect();
        Some(OobView { rows, labels, base })
    }

    fn permuted_metric(
        &self,
        tree: &Tree,
        dataset: &Dataset,
        variable: usize,
        metric: Metric,
        permutation: &[usize],
        scratch: &mut Vec<(f64, u8)>,
    ) -> f64 {
        let col = dataset.column(variable);
        let scores: Vec<f64> = self
            .rows
            .iter()
            .zip(permutation)
            .map(|(&r, &src)| {
                let moved = col[self.rows[src]];
                tree.predict_with(|f| if f == variable { moved } else { dataset.value(r, f) })
            })
            .collect();
        metric_value(metric, &scores, &self.labels, scratch)
    }
}

/// Out-of-bag permutation importance: one shuffle per (tree, variable)
/// drawn from [`permutation_stream`]. Variables a tree never splits on get
/// a difference of exactly 0 without shuffling. With [`Metric::Auc`], trees
/// whose out-of-bag units are all one class are skipped; with accuracy only
/// trees without out-of-bag units are.
pub fn permutation_importance(
    forest: &Forest,
    dataset: &Dataset,
    metric: Metric,
    seed: SeedSpec,
    u: f64,
) -> Result<ImportanceReport> {
    forest.check_shape(dataset)?;
    let p = dataset.p();
    let unit_rows = forest.unit_rows();
    let per_tree: Vec<Option<Vec<f64>>> = forest
        .trees()
        .par_iter()
        .enumerate()
        .map(|(t, tree)| {
            let oob = OobView::new(tree, dataset, &unit_rows, metric)?;
            let mut scratch = Vec::new();
            let base = metric_value(metric, &oob.base, &oob.labels, &mut scratch);
            let used = tree.used_features(p);
            let mut perm: Vec<usize> = Vec::with_capacity(oob.rows.len());
            let diffs = (0..p)
                .map(|j| {
                    if !used[j] {
                        return 0.0;
                    }
                    perm.clear();
                    perm.extend(0..oob.rows.len());
                    perm.shuffle(&mut permutation_stream(seed, t, j).rng());
                    base - oob.permuted_metric(tree, dataset, j, metric, &perm, &mut scratch)
                })
                .collect();
            Some(diffs)
        })
        .collect();
    let skipped = per_tree.iter().filter(|d| d.is_none()).count();
    if skipped == per_tree.len() {
        return Err(Error::NoComputableImportance { skipped });
    }
    let records = (0..p)
        .map(|j| {
            let diffs = per_tree.iter().map(|d| d.as_ref().map(|d| d[j])).collect();
            ImportanceRecord::from_diffs(j, dataset.feature_names()[j].clone(), diffs, u)
        })
        .collect();
    let method = match metric {
        Metric::Accuracy => ImportanceMethod::PermAccu,
        Metric::Auc => ImportanceMethod::perm_auc_for(forest.config().sampling),
    };
    Ok(ImportanceReport {
        method,
        records,
        forest_config: *forest.config(),
        u,
    })
}

/// Forest configuration `measure_importance` uses for a sampling mode.
pub fn importance_forest_config(config: &ForestConfig, sampling: Sampling, seed: SeedSpec) -> ForestConfig {
    config
        .with_sampling(sampling)
        .with_seed(seed.derive2(tag::FOREST, sampling.tag()))
}

/// Trains the forest the method calls for (the sampling mode in `config`
/// is overridden) and measures importance with `u = 2`.
pub fn measure_importance(
    dataset: &Dataset,
    method: ImportanceMethod,
    config: &ForestConfig,
    seed: SeedSpec,
) -> Result<ImportanceReport> {
    let mut reports = measure_importances(dataset, &[method], config, seed)?;
    Ok(reports.remove(0))
}

/// Several methods at once; methods with the same sampling mode share one
/// forest. Each report equals the one [`measure_importance`] returns.
pub fn measure_importances(
    dataset: &Dataset,
    methods: &[ImportanceMethod],
    config: &ForestConfig,
    seed: SeedSpec,
) -> Result<Vec<ImportanceReport>> {
    let mut forests: BTreeMap<u64, Forest> = BTreeMap::new();
    let mut reports = Vec::with_capacity(methods.len());
    for &method in methods {
        let sampling = method.sampling();
        let forest = match forests.entry(sampling.tag()) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(fit_forest(dataset, &importance_forest_config(config, sampling, seed))?)
            }
        };
        let report = match method.metric() {
            None => gini_importance(forest),
            Some(metric) => permutation_importance(
                forest,
                dataset,
                metric,
                seed.derive2(tag::PERMUTE, sampling.tag()),
                DEFAULT_U,
            )?,
        };
        reports.push(report);
    }
    Ok(reports)
}
