//! Feature selection: the interval-driven candidate search with out-of-bag
//! AUC scoring, and backward elimination baselines.
//!
//! The search sorts variables by importance (`X(1)` most important) and
//! starts from the full set with pivot `X(m)`. While `CI_lower(X(1))`
//! exceeds `CI_upper` of the current pivot, the next pivot is the
//! lowest-ranked variable whose lower bound still exceeds that upper bound,
//! and the candidate set shrinks to everything up to it.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::forest::{fit_forest, oob_predictions, ForestConfig, Sampling};
use crate::importance::{measure_importance, ImportanceMethod, ImportanceReport};
use crate::seed::{tag, SeedSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    /// Column indices by descending importance.
    pub variables: Vec<usize>,
    /// Least important member.
    pub pivot: usize,
    /// `None` until scored, or when the out-of-bag units are one class.
    pub oob_auc: Option<f64>,
    pub oob_error: Option<f64>,
}

impl CandidateSet {
    pub fn new(variables: Vec<usize>) -> Self {
        let pivot = *variables.last().expect("candidate sets are nonempty");
        CandidateSet {
            variables,
            pivot,
            oob_auc: None,
            oob_error: None,
        }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    OobAucMax,
    OobErrorMin,
}

impl Criterion {
    fn score(self, c: &CandidateSet) -> Option<f64> {
        match self {
            Criterion::OobAucMax => c.oob_auc,
            Criterion::OobErrorMin => c.oob_error.map(|e| -e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selector {
    Auc,
    AucUnder,
    AucOver,
    /// Permutation-accuracy ranking, minimum out-of-bag error.
    DiazUri,
    /// Gini ranking, maximum out-of-bag AUC.
    Calle,
}

impl Selector {
    pub const ALL: [Selector; 5] = [
        Selector::DiazUri,
        Selector::Calle,
        Selector::Auc,
        Selector::AucUnder,
        Selector::AucOver,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Selector::Auc => "auc",
            Selector::AucUnder => "auc-under",
            Selector::AucOver => "auc-over",
            Selector::DiazUri => "diaz-uri",
            Selector::Calle => "calle",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Selector::Auc => "AUC",
            Selector::AucUnder => "AUC+Under",
            Selector::AucOver => "AUC+Over",
            Selector::DiazUri => "Diaz-Uri",
            Selector::Calle => "Calle",
        }
    }

    /// Sampling mode of the forests the selector trains.
    pub fn sampling(self) -> Sampling {
        match self {
            Selector::AucUnder => Sampling::Under,
            Selector::AucOver => Sampling::Over,
            _ => Sampling::None,
        }
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Selector::DiazUri | Selector::Calle)
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Selector::ALL
            .into_iter()
            .find(|m| m.as_str() == s || m.display_name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "selector",
                name: s.into(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: String,
    pub criterion: Criterion,
    pub candidates: Vec<CandidateSet>,
    pub optimal: usize,
    pub n_candidates: usize,
    pub feature_names: Vec<String>,
    pub importance_report: ImportanceReport,
}

impl SelectionResult {
    fn new(
        method: String,
        criterion: Criterion,
        candidates: Vec<CandidateSet>,
        feature_names: Vec<String>,
        importance_report: ImportanceReport,
    ) -> Result<Self> {
        let optimal = argmax(&candidates, criterion)?;
        Ok(SelectionResult {
            method,
            criterion,
            n_candidates: candidates.len(),
            candidates,
            optimal,
            feature_names,
            importance_report,
        })
    }

    pub fn selected(&self) -> &CandidateSet {
        &self.candidates[self.optimal]
    }

    pub fn selected_names(&self) -> Vec<String> {
        self.selected()
            .variables
            .iter()
            .map(|&j| self.feature_names[j].clone())
            .collect()
    }

    /// One row per candidate: index, size, members (`;`-separated), pivot,
    /// oob_auc, oob_error, optimal.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["candidate", "size", "members", "pivot", "oob_auc", "oob_error", "optimal"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for (i, c) in self.candidates.iter().enumerate() {
            let members: Vec<&str> = c.variables.iter().map(|&j| self.feature_names[j].as_str()).collect();
            w.write_record([
                i.to_string(),
                c.len().to_string(),
                members.join(";"),
                self.feature_names[c.pivot].clone(),
                opt(c.oob_auc),
                opt(c.oob_error),
                (i == self.optimal).to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    /// Summary JSON: method, n_candidates, optimal index, selected names and
    /// every candidate with its scores.
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            size: usize,
            members: Vec<&'a str>,
            pivot: &'a str,
            oob_auc: Option<f64>,
            oob_error: Option<f64>,
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            method: &'a str,
            criterion: Criterion,
            n_candidates: usize,
            optimal: usize,
            selected: Vec<String>,
            candidates: Vec<Row<'a>>,
        }
        let candidates = self
            .candidates
            .iter()
            .map(|c| Row {
                size: c.len(),
                members: c.variables.iter().map(|&j| self.feature_names[j].as_str()).collect(),
                pivot: &self.feature_names[c.pivot],
                oob_auc: c.oob_auc,
                oob_error: c.oob_error,
            })
            .collect();
        let summary = Summary {
            method: &self.method,
            criterion: self.criterion,
            n_candidates: self.n_candidates,
            optimal: self.optimal,
            selected: self.selected_names(),
            candidates,
        };
        serde_json::to_writer_pretty(out, &summary)?;
        Ok(())
    }
}

/// Best scored candidate; ties go to the later (smaller) set.
fn argmax(candidates: &[CandidateSet], criterion: Criterion) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if let Some(s) = criterion.score(c) {
            let better = match best {
                None => true,
                Some((j, b)) => s > b || (s == b && c.len() < candidates[j].len()),
            };
            if better {
                best = Some((i, s));
            }
        }
    }
    best.map(|(i, _)| i).ok_or(Error::NoScorableCandidate)
}

/// Nested candidate sets from a report's intervals.
pub fn search_candidates(report: &ImportanceReport) -> Vec<CandidateSet> {
    let order = report.ranking();
    let lower: Vec<f64> = order.iter().map(|&j| report.records[j].ci_lower).collect();
    let upper: Vec<f64> = order.iter().map(|&j| report.records[j].ci_upper).collect();
    let mut pivot = order.len() - 1;
    let mut candidates = vec![CandidateSet::new(order.clone())];
    while lower[0] > upper[pivot] {
        let bound = upper[pivot];
        let next = (0..order.len())
            .rev()
            .find(|&k| lower[k] > bound)
            .expect("k = 0 qualifies");
        if next >= pivot {
            log::debug!("interval at rank {next} lies above the pivot at rank {pivot}; stopping");
            break;
        }
        pivot = next;
        candidates.push(CandidateSet::new(order[..=pivot].to_vec()));
    }
    candidates
}

/// Seed of the forest that scores a candidate of `size` variables.
pub fn candidate_seed(seed: SeedSpec, size: usize) -> SeedSpec {
    seed.derive2(tag::SCORE, size as u64)
}

/// Fits one forest per candidate on its columns and records the out-of-bag
/// AUC and error rate over covered units.
pub fn score_candidates(
    dataset: &Dataset,
    candidates: &[CandidateSet],
    sampling: Sampling,
    config: &ForestConfig,
    seed: SeedSpec,
) -> Result<Vec<CandidateSet>> {
    candidates
        .par_iter()
        .map(|c| {
            let sub = dataset.select_columns(&c.variables)?;
            let mut cfg = config
                .with_sampling(sampling)
                .with_seed(candidate_seed(seed, c.len()));
            cfg.mtry = cfg.mtry.map(|m| m.min(c.len()));
            let forest = fit_forest(&sub, &cfg)?;
            let oob = oob_predictions(&forest, &sub)?;
            let mut scored = c.clone();
            scored.oob_auc = oob.auc().ok();
            scored.oob_error = oob.error_rate().ok();
            Ok(scored)
        })
        .collect()
}

/// Permutation-AUC importance under the selector's sampling mode, interval
/// search with multiplier `u`, then scoring.
pub fn select_optimal(
    dataset: &Dataset,
    selector: Selector,
    config: &ForestConfig,
    seed: SeedSpec,
    u: f64,
) -> Result<SelectionResult> {
    if selector.is_baseline() {
        return baseline_select(dataset, selector, config, seed);
    }
    if !(u.is_finite() && u >= 0.0) {
        return Err(Error::InvalidConfig(format!("u must be non-negative, got {u}")));
    }
    let sampling = selector.sampling();
    let method = ImportanceMethod::perm_auc_for(sampling);
    let report = measure_importance(dataset, method, config, seed.derive(tag::IMPORTANCE))?.with_u(u);
    let candidates = search_candidates(&report);
    let scored = score_candidates(dataset, &candidates, sampling, config, seed.derive(tag::SELECT))?;
    SelectionResult::new(
        selector.as_str().into(),
        Criterion::OobAucMax,
        scored,
        dataset.feature_names().to_vec(),
        report,
    )
}

/// Candidate sizes `s0 = p`, `s(k+1) = floor((1 - drop_rate) s(k))`, never
/// below 2, ending with the first size `<= 2`.
pub fn baseline_sizes(p: usize, drop_rate: f64) -> Vec<usize> {
    let mut sizes = vec![p];
    let mut s = p;
    while s > 2 {
        let next = (((1.0 - drop_rate) * s as f64 + 1e-9).floor() as usize).clamp(2, s - 1);
        sizes.push(next);
        s = next;
    }
    sizes
}

pub const DEFAULT_DROP_RATE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineRanking {
    PermAccu,
    Gini,
}

/// Ranks variables once on a plain forest over all columns, then scores the
/// top `s` variables for every size in [`baseline_sizes`].
pub fn baseline_backward_select(
    dataset: &Dataset,
    ranking: BaselineRanking,
    criterion: Criterion,
    drop_rate: f64,
    config: &ForestConfig,
    seed: SeedSpec,
) -> Result<SelectionResult> {
    if !(drop_rate > 0.0 && drop_rate < 1.0) {
        return Err(Error::InvalidConfig(format!("drop rate must lie in (0, 1), got {drop_rate}")));
    }
    if dataset.p() < 2 {
        return Err(Error::InvalidConfig("backward elimination needs at least two variables".into()));
    }
    let method = match ranking {
        BaselineRanking::PermAccu => ImportanceMethod::PermAccu,
        BaselineRanking::Gini => ImportanceMethod::Gini,
    };
    let report = measure_importance(dataset, method, config, seed.derive(tag::IMPORTANCE))?;
    let order = report.ranking();
    let candidates: Vec<CandidateSet> = baseline_sizes(dataset.p(), drop_rate)
        .into_iter()
        .map(|s| CandidateSet::new(order[..s].to_vec()))
        .collect();
    let scored = score_candidates(dataset, &candidates, Sampling::None, config, seed.derive(tag::SELECT))?;
    let name = match (ranking, criterion) {
        (BaselineRanking::PermAccu, Criterion::OobErrorMin) => Selector::DiazUri.as_str().to_string(),
        (BaselineRanking::Gini, Criterion::OobAucMax) => Selector::Calle.as_str().to_string(),
        (r, c) => format!("backward-{r:?}-{c:?}").to_lowercase(),
    };
    SelectionResult::new(name, criterion, scored, dataset.feature_names().to_vec(), report)
}

fn baseline_select(dataset: &Dataset, selector: Selector, config: &ForestConfig, seed: SeedSpec) -> Result<SelectionResult> {
    let (ranking, criterion) = match selector {
        Selector::DiazUri => (BaselineRanking::PermAccu, Criterion::OobErrorMin),
        _ => (BaselineRanking::Gini, Criterion::OobAucMax),
    };
    baseline_backward_select(dataset, ranking, criterion, DEFAULT_DROP_RATE, config, seed)
}
