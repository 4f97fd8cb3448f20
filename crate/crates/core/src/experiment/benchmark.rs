//! Cross-validated AUC of forests refit on each selector's chosen features.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::CvBenchmarkConfig;
use super::report::{self, Failure, SummaryRow};
use super::with_workers;
use crate::data::{stratified_kfold, Dataset};
use crate::error::{Error, Result};
use crate::forest::fit_forest;
use crate::metrics::auc;
use crate::seed::{name_tag, tag, SeedSpec};
use crate::selection::{select_optimal, Selector};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub dataset: String,
    pub replicate: usize,
    pub fold: usize,
    pub method: Selector,
    pub auc: f64,
    pub n_candidates: usize,
    pub selected: Vec<String>,
}

/// Fold averages for one `(dataset, replicate, selector)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateResult {
    pub dataset: String,
    pub replicate: usize,
    pub method: Selector,
    pub cv_auc: f64,
    pub n_candidates: f64,
    pub selected_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub config: CvBenchmarkConfig,
    pub datasets: Vec<DatasetInfo>,
    pub summary: Vec<SummaryRow>,
    #[serde(skip)]
    pub replicates: Vec<ReplicateResult>,
    #[serde(skip)]
    pub folds: Vec<FoldResult>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub name: String,
    pub n: usize,
    pub p: usize,
    pub imbalance_ratio: f64,
}

impl BenchmarkReport {
    /// Per-replicate CV-AUC of one selector on one dataset.
    pub fn cv_aucs(&self, dataset: &str, method: Selector) -> Vec<f64> {
        self.replicates
            .iter()
            .filter(|r| r.dataset == dataset && r.method == method)
            .map(|r| r.cv_auc)
            .collect()
    }

    pub fn statistic(&self, dataset: &str, method: Selector, statistic: &str) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.setting == dataset && r.method == method.display_name() && r.statistic == statistic)
    }

    /// Writes `summary.csv`, `replicates.csv`, `folds.csv`, `failures.csv`,
    /// `summary.json` and `table.txt`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        report::write_summary_csv(&self.summary, report::create(dir, "summary.csv")?)?;
        report::write_failures_csv(&self.failures, report::create(dir, "failures.csv")?)?;
        write_replicates_csv(&self.replicates, report::create(dir, "replicates.csv")?)?;

        let mut w = csv::Writer::from_writer(report::create(dir, "folds.csv")?);
        w.write_record(["dataset", "replicate", "fold", "method", "auc", "n_candidates", "selected"])?;
        for f in &self.folds {
            w.write_record([
                f.dataset.as_str(),
                &f.replicate.to_string(),
                &f.fold.to_string(),
                f.method.display_name(),
                &f.auc.to_string(),
                &f.n_candidates.to_string(),
                &f.selected.join(";"),
            ])?;
        }
        report::finish(w, &dir.join("folds.csv"))?;

        serde_json::to_writer_pretty(report::create(dir, "summary.json")?, self)?;
        let table = report::render_table(&self.summary, &["cv_auc", "cv_auc_sd", "n_candidates"], 3);
        std::fs::write(dir.join("table.txt"), table).map_err(|e| Error::io(dir.join("table.txt"), e))
    }
}

/// Columns: dataset, replicate, method, cv_auc, n_candidates,
/// selected_size. This is the input format of the pairwise comparison.
pub fn write_replicates_csv<W: std::io::Write>(rows: &[ReplicateResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "replicate", "method", "cv_auc", "n_candidates", "selected_size"])?;
    for r in rows {
        w.write_record([
            r.dataset.as_str(),
            &r.replicate.to_string(),
            r.method.display_name(),
            &r.cv_auc.to_string(),
            &r.n_candidates.to_string(),
            &r.selected_size.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

fn selector_tag(s: Selector) -> u64 {
    name_tag(s.as_str())
}

/// Runs every selector inside every training fold. The evaluation forest is
/// fit on the training fold restricted to the selected columns, with the
/// selector's sampling mode, and scored by held-out AUC.
pub fn run_fold(
    train: &Dataset,
    test: &Dataset,
    selector: Selector,
    config: &CvBenchmarkConfig,
    seed: SeedSpec,
) -> Result<(f64, usize, Vec<usize>)> {
    let seed = seed.derive(selector_tag(selector));
    let sel = select_optimal(train, selector, &config.forest, seed.derive(tag::SELECT), config.u)?;
    let vars = sel.selected().variables.clone();
    let tr = train.select_columns(&vars)?;
    let te = test.select_columns(&vars)?;
    let mut fc = config
        .forest
        .with_sampling(selector.sampling())
        .with_seed(seed.derive(tag::EVAL));
    fc.mtry = fc.mtry.map(|m| m.min(vars.len()));
    let forest = fit_forest(&tr, &fc)?;
    let scores = forest.predict_dataset(&te)?;
    Ok((auc(&scores, te.labels())?, sel.n_candidates, vars))
}

struct Unit {
    dataset: usize,
    replicate: usize,
}

/// Replicate `r` of each dataset draws its own stratified folds; within a
/// fold every selector gets an independent seed.
pub fn run_cv_benchmark(config: &CvBenchmarkConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    with_workers(config.workers, || run(config))?
}

fn run(config: &CvBenchmarkConfig) -> Result<BenchmarkReport> {
    let master = SeedSpec(config.seed);
    let names: Vec<String> = config.datasets.iter().map(|d| d.name()).collect();
    let data: Vec<Dataset> = config
        .datasets
        .iter()
        .map(|d| d.load(&config.base_dir, master))
        .collect::<Result<_>>()?;
    for (name, ds) in names.iter().zip(&data) {
        let (_, n1) = ds.class_counts();
        if n1.min(ds.n() - n1) < config.folds {
            return Err(Error::InvalidDataset(format!(
                "dataset `{name}` has fewer than {} rows in its smaller class",
                config.folds
            )));
        }
    }
    let units: Vec<Unit> = (0..data.len())
        .flat_map(|d| (0..config.replicates).map(move |r| Unit { dataset: d, replicate: r }))
        .collect();
    type Outcome = Vec<(usize, Selector, Result<(f64, usize, Vec<usize>)>)>;
    let outcomes: Vec<Result<Outcome>> = units
        .par_iter()
        .map(|u| {
            let ds = &data[u.dataset];
            let seed = master
                .derive(name_tag(&names[u.dataset]))
                .derive2(tag::REPLICATE, u.replicate as u64);
            let folds = stratified_kfold(ds, config.folds, seed.derive(tag::FOLDS))?;
            let mut out = Vec::new();
            for f in 0..config.folds {
                let train = ds.subset_rows(&folds.train_rows(f))?;
                let test = ds.subset_rows(&folds.test_rows(f))?;
                let fold_seed = seed.derive2(tag::EVAL, f as u64);
                for &s in &config.selectors {
                    out.push((f, s, run_fold(&train, &test, s, config, fold_seed)));
                }
            }
            Ok(out)
        })
        .collect();

    let mut folds = Vec::new();
    let mut replicates = Vec::new();
    let mut failures = Vec::new();
    for (u, outcome) in units.iter().zip(outcomes) {
        let name = &names[u.dataset];
        let outcome = outcome?;
        for &s in &config.selectors {
            let mut ok = Vec::new();
            for (f, _, res) in outcome.iter().filter(|(_, m, _)| *m == s) {
                match res {
                    Ok((a, nc, vars)) => {
                        let feature_names = data[u.dataset].feature_names();
                        folds.push(FoldResult {
                            dataset: name.clone(),
                            replicate: u.replicate,
                            fold: *f,
                            method: s,
                            auc: *a,
                            n_candidates: *nc,
                            selected: vars.iter().map(|&j| feature_names[j].clone()).collect(),
                        });
                        ok.push((*a, *nc as f64, vars.len() as f64));
                    }
                    Err(e) => failures.push(Failure {
                        setting: name.clone(),
                        replicate: u.replicate,
                        method: s.display_name().into(),
                        error: format!("fold {f}: {e}"),
                    }),
                }
            }
            if ok.len() == config.folds {
                let k = ok.len() as f64;
                replicates.push(ReplicateResult {
                    dataset: name.clone(),
                    replicate: u.replicate,
                    method: s,
                    cv_auc: ok.iter().map(|x| x.0).sum::<f64>() / k,
                    n_candidates: ok.iter().map(|x| x.1).sum::<f64>() / k,
                    selected_size: ok.iter().map(|x| x.2).sum::<f64>() / k,
                });
            }
        }
    }

    let mut summary = Vec::new();
    for name in &names {
        for &s in &config.selectors {
            let reps: Vec<&ReplicateResult> = replicates
                .iter()
                .filter(|r| &r.dataset == name && r.method == s)
                .collect();
            let aucs: Vec<f64> = reps.iter().map(|r| r.cv_auc).collect();
            let ncs: Vec<f64> = reps.iter().map(|r| r.n_candidates).collect();
            let sizes: Vec<f64> = reps.iter().map(|r| r.selected_size).collect();
            let mut row = |statistic: &str, value: f64, stderr: Option<f64>| {
                summary.push(SummaryRow {
                    setting: name.clone(),
                    method: s.display_name().into(),
                    statistic: statistic.into(),
                    value,
                    stderr,
                })
            };
            row("replicates", reps.len() as f64, None);
            row("cv_auc", report::mean(&aucs), report::stderr(&aucs));
            row("cv_auc_sd", report::sd(&aucs).unwrap_or(0.0), None);
            row("n_candidates", report::mean(&ncs), report::stderr(&ncs));
            row("selected_size", report::mean(&sizes), report::stderr(&sizes));
        }
    }
    let datasets = names
        .iter()
        .zip(&data)
        .map(|(name, ds)| DatasetInfo {
            name: name.clone(),
            n: ds.n(),
            p: ds.p(),
            imbalance_ratio: crate::data::imbalance_ratio(ds),
        })
        .collect();
    Ok(BenchmarkReport {
        config: config.clone(),
        datasets,
        summary,
        replicates,
        folds,
        failures,
    })
}
