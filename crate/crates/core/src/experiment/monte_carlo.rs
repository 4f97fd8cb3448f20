//! Monte Carlo study of importance rankings on the block simulation.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::MonteCarloConfig;
use super::report::{self, Failure, SummaryRow};
use super::with_workers;
use crate::error::Result;
use crate::importance::{measure_importances, ImportanceMethod};
use crate::seed::{tag, SeedSpec};
use crate::stats::{rank_and_classify, Misclassification};
use crate::synth::{gen_simulation, EffectCategory};

/// Importances of one replicate under one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateImportance {
    pub setting: String,
    pub n: usize,
    pub ir: f64,
    pub replicate: usize,
    pub method: ImportanceMethod,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub setting: String,
    pub n: usize,
    pub ir: f64,
    pub method: ImportanceMethod,
    pub replicates: usize,
    pub mean_importance: Vec<f64>,
    pub misclassification: Misclassification,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub config: MonteCarloConfig,
    pub feature_names: Vec<String>,
    pub categories: Vec<EffectCategory>,
    pub cells: Vec<CellResult>,
    pub summary: Vec<SummaryRow>,
    #[serde(skip)]
    pub raw: Vec<ReplicateImportance>,
    pub failures: Vec<Failure>,
}

impl MonteCarloReport {
    pub fn cell(&self, n: usize, ir: f64, method: ImportanceMethod) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.ir == ir && c.method == method)
    }

    /// Writes `summary.csv`, `replicates.csv`, `plot_quantiles.csv`,
    /// `failures.csv`, `summary.json` and `table.txt`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::io(dir, e))?;

        report::write_summary_csv(&self.summary, report::create(dir, "summary.csv")?)?;
        report::write_failures_csv(&self.failures, report::create(dir, "failures.csv")?)?;

        let mut w = csv::Writer::from_writer(report::create(dir, "replicates.csv")?);
        w.write_record(["setting", "n", "ir", "replicate", "method", "variable", "name", "importance"])?;
        for r in &self.raw {
            for (j, v) in r.values.iter().enumerate() {
                w.write_record([
                    r.setting.as_str(),
                    &r.n.to_string(),
                    &r.ir.to_string(),
                    &r.replicate.to_string(),
                    r.method.as_str(),
                    &j.to_string(),
                    &self.feature_names[j],
                    &v.to_string(),
                ])?;
            }
        }
        report::finish(w, &dir.join("replicates.csv"))?;

        let mut w = csv::Writer::from_writer(report::create(dir, "plot_quantiles.csv")?);
        w.write_record([
            "setting", "method", "variable", "name", "category", "mean", "q05", "q25", "q50", "q75", "q95",
        ])?;
        for cell in &self.cells {
            for j in 0..self.feature_names.len() {
                let mut xs: Vec<f64> = self
                    .raw
                    .iter()
                    .filter(|r| r.setting == cell.setting && r.method == cell.method)
                    .map(|r| r.values[j])
                    .collect();
                if xs.is_empty() {
                    continue;
                }
                xs.sort_by(f64::total_cmp);
                let mut line = vec![
                    cell.setting.clone(),
                    cell.method.as_str().to_string(),
                    j.to_string(),
                    self.feature_names[j].clone(),
                    self.categories[j].as_str().to_string(),
                    cell.mean_importance[j].to_string(),
                ];
                line.extend([0.05, 0.25, 0.5, 0.75, 0.95].map(|q| report::quantile(&xs, q).to_string()));
                w.write_record(&line)?;
            }
        }
        report::finish(w, &dir.join("plot_quantiles.csv"))?;

        let json = report::create(dir, "summary.json")?;
        serde_json::to_writer_pretty(json, self)?;

        let table = report::render_table(
            &self.summary,
            &["mis_strong", "mis_moderate", "mis_weak", "replicates"],
            0,
        );
        std::fs::write(dir.join("table.txt"), table).map_err(|e| crate::error::Error::io(dir.join("table.txt"), e))
    }
}

pub fn setting_label(n: usize, ir: f64) -> String {
    format!("N={n},IR={ir}")
}

/// Seed of replicate `r` in the `(n, ir)` setting. Independent of the grid
/// layout, so adding grid points leaves other settings unchanged.
pub fn replicate_seed(master: SeedSpec, n: usize, ir: f64, r: usize) -> SeedSpec {
    master
        .derive2(tag::SETTING, n as u64)
        .derive(ir.to_bits())
        .derive2(tag::REPLICATE, r as u64)
}

type Unit = (usize, f64, usize);

/// Runs every `(N, IR)` setting for `replicates` replicates. Each replicate
/// draws one dataset and measures all methods on it; methods sharing a
/// sampling mode share a forest. Failed replicates are listed in
/// `failures` and left out of the means.
pub fn run_monte_carlo(config: &MonteCarloConfig) -> Result<MonteCarloReport> {
    config.validate()?;
    with_workers(config.workers, || run(config))?
}

fn run(config: &MonteCarloConfig) -> Result<MonteCarloReport> {
    let master = SeedSpec(config.seed);
    let mut units: Vec<Unit> = Vec::new();
    for &n in &config.n_grid {
        for &ir in &config.ir_grid {
            units.extend((0..config.replicates).map(|r| (n, ir, r)));
        }
    }
    let outcomes: Vec<(Unit, Result<Vec<Vec<f64>>>)> = units
        .par_iter()
        .map(|&(n, ir, r)| {
            let seed = replicate_seed(master, n, ir, r);
            let out = gen_simulation(&config.simulation(n, ir), seed.derive(tag::SIMULATE)).and_then(|ds| {
                let reports = measure_importances(&ds, &config.methods, &config.forest, seed.derive(tag::IMPORTANCE))?;
                Ok(reports.into_iter().map(|r| r.values()).collect())
            });
            ((n, ir, r), out)
        })
        .collect();

    let sim = config.simulation(config.n_grid[0], config.ir_grid[0]);
    let categories = sim.categories();
    let p = sim.p();
    let mut raw = Vec::new();
    let mut failures = Vec::new();
    for ((n, ir, r), out) in outcomes {
        let setting = setting_label(n, ir);
        match out {
            Ok(values) => {
                for (&method, values) in config.methods.iter().zip(values) {
                    raw.push(ReplicateImportance {
                        setting: setting.clone(),
                        n,
                        ir,
                        replicate: r,
                        method,
                        values,
                    });
                }
            }
            Err(e) => {
                log::warn!("{setting} replicate {r}: {e}");
                failures.push(Failure {
                    setting,
                    replicate: r,
                    method: "all".into(),
                    error: e.to_string(),
                });
            }
        }
    }

    let mut cells = Vec::new();
    let mut summary = Vec::new();
    for &n in &config.n_grid {
        for &ir in &config.ir_grid {
            let setting = setting_label(n, ir);
            for &method in &config.methods {
                let reps: Vec<&ReplicateImportance> = raw
                    .iter()
                    .filter(|x| x.n == n && x.ir == ir && x.method == method)
                    .collect();
                let mut mean_importance = vec![0.0; p];
                for x in &reps {
                    for (m, v) in mean_importance.iter_mut().zip(&x.values) {
                        *m += v;
                    }
                }
                for m in &mut mean_importance {
                    *m /= reps.len().max(1) as f64;
                }
                let mis = rank_and_classify(&mean_importance, &categories)?;
                let mut row = |statistic: &str, value: f64, stderr: Option<f64>| {
                    summary.push(SummaryRow {
                        setting: setting.clone(),
                        method: method.display_name().into(),
                        statistic: statistic.into(),
                        value,
                        stderr,
                    })
                };
                row("replicates", reps.len() as f64, None);
                row("mis_strong", mis.strong as f64, None);
                row("mis_moderate", mis.moderate as f64, None);
                row("mis_weak", mis.weak as f64, None);
                row("mis_total", mis.total() as f64, None);
                for cat in EffectCategory::ALL {
                    let block: Vec<usize> = (0..p).filter(|&j| categories[j] == cat).collect();
                    if block.is_empty() {
                        continue;
                    }
                    let per_rep: Vec<f64> = reps
                        .iter()
                        .map(|x| block.iter().map(|&j| x.values[j]).sum::<f64>() / block.len() as f64)
                        .collect();
                    row(
                        &format!("block_mean_{}", cat.as_str()),
                        report::mean(&per_rep),
                        report::stderr(&per_rep),
                    );
                }
                cells.push(CellResult {
                    setting: setting.clone(),
                    n,
                    ir,
                    method,
                    replicates: reps.len(),
                    mean_importance,
                    misclassification: mis,
                });
            }
        }
    }
    Ok(MonteCarloReport {
        config: config.clone(),
        feature_names: crate::data::default_names(p),
        categories,
        cells,
        summary,
        raw,
        failures,
    })
}
