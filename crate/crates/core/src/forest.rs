//! Random forests under plain bootstrap, per-class under-sampling and
//! minority over-sampling, with out-of-bag bookkeeping.
//!
//! Every forest is trained on a *training table*: the dataset itself, or for
//! [`Sampling::Over`] a class-balanced table whose rows are copies of
//! dataset rows. `origin_map[t]` is the dataset row behind training row `t`.
//! The table is never materialized.

use std::borrow::Cow;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed::{tag, Rng, SeedSpec};
use crate::tree::{grow, GrowParams, RankIndex, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Bootstrap of size `n` from all rows.
    None,
    /// `n1` draws with replacement from each class.
    Under,
    /// Bootstrap of the minority-over-sampled balanced table.
    Over,
}

impl Sampling {
    pub fn as_str(self) -> &'static str {
        match self {
            Sampling::None => "none",
            Sampling::Under => "under",
            Sampling::Over => "over",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        match self {
            Sampling::None => 0,
            Sampling::Under => 1,
            Sampling::Over => 2,
        }
    }
}

impl FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Sampling::None),
            "under" => Ok(Sampling::Under),
            "over" => Ok(Sampling::Over),
            other => Err(Error::UnknownName {
                kind: "sampling mode",
                name: other.into(),
            }),
        }
    }
}

/// Which rows count as out-of-bag for a tree. The two rules differ only
/// under [`Sampling::Over`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OobRule {
    /// Rows of the training table; a copy of a minority row can be out of
    /// bag while another copy is in bag.
    #[default]
    TrainingRow,
    /// Dataset rows; a row is out of bag only if none of its copies is in
    /// bag.
    OriginalRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub ntree: usize,
    /// Features tried per node; `None` means `floor(sqrt(p))`.
    pub mtry: Option<usize>,
    pub min_leaf_size: usize,
    pub sampling: Sampling,
    pub oob_rule: OobRule,
    pub seed: SeedSpec,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            ntree: 200,
            mtry: None,
            min_leaf_size: 1,
            sampling: Sampling::None,
            oob_rule: OobRule::default(),
            seed: SeedSpec(0),
        }
    }
}

impl ForestConfig {
    pub fn resolved_mtry(&self, p: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| ((p as f64).sqrt().floor() as usize).max(1))
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_seed(mut self, seed: SeedSpec) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ntree(mut self, ntree: usize) -> Self {
        self.ntree = ntree;
        self
    }

    fn validate(&self, p: usize) -> Result<()> {
        let mtry = self.resolved_mtry(p);
        if mtry == 0 || mtry > p {
            return Err(Error::Mtry { mtry, p });
        }
        if self.ntree == 0 {
            return Err(Error::InvalidConfig("ntree must be positive".into()));
        }
        if self.min_leaf_size == 0 {
            return Err(Error::InvalidConfig("min_leaf_size must be positive".into()));
        }
        Ok(())
    }
}

/// One tree's bootstrap sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingSample {
    /// Copies of each training-table row.
    pub in_bag: Vec<u32>,
    /// Dataset rows with no copy in bag, ascending.
    pub oob_original: Vec<usize>,
}

/// Draws one tree's in-bag multiset from the training table described by
/// `origin_map`.
///
/// `None` and `Over` draw `|table|` rows with replacement from the whole
/// table; `Under` draws `m` rows with replacement from each class, `m`
/// being the smaller class count.
pub fn draw_training_sample(
    dataset: &Dataset,
    origin_map: &[usize],
    sampling: Sampling,
    rng: &mut Rng,
) -> TrainingSample {
    let t = origin_map.len();
    let mut in_bag = vec![0u32; t];
    match sampling {
        Sampling::None | Sampling::Over => {
            for _ in 0..t {
                in_bag[rng.random_range(0..t)] += 1;
            }
        }
        Sampling::Under => {
            let (zeros, ones): (Vec<usize>, Vec<usize>) =
                (0..t).partition(|&r| dataset.label(origin_map[r]) == 0);
            let m = zeros.len().min(ones.len());
            for class in [&ones, &zeros] {
                for _ in 0..m {
                    in_bag[class[rng.random_range(0..class.len())]] += 1;
                }
            }
        }
    }
    let mut covered = vec![false; dataset.n()];
    for (r, &c) in in_bag.iter().enumerate() {
        if c > 0 {
            covered[origin_map[r]] = true;
        }
    }
    let oob_original = (0..dataset.n()).filter(|&i| !covered[i]).collect();
    TrainingSample { in_bag, oob_original }
}

/// Balances classes by keeping every row once and adding copies of
/// smaller-class rows, drawn with replacement, until both classes have the
/// larger count. Returns the balanced table and its origin map. A balanced
/// input is returned unchanged.
pub fn oversample_balance(dataset: &Dataset, rng: &mut Rng) -> Result<(Dataset, Vec<usize>)> {
    let origin_map = oversample_origin_map(dataset, rng);
    let balanced = dataset.subset_rows(&origin_map)?;
    Ok((balanced, origin_map))
}

pub(crate) fn oversample_origin_map(dataset: &Dataset, rng: &mut Rng) -> Vec<usize> {
    let (n0, n1) = dataset.class_counts();
    let mut origin_map: Vec<usize> = (0..dataset.n()).collect();
    if n0 == n1 {
        return origin_map;
    }
    let small = u8::from(n1 < n0);
    let pool: Vec<usize> = (0..dataset.n()).filter(|&i| dataset.label(i) == small).collect();
    for _ in 0..n0.abs_diff(n1) {
        origin_map.push(pool[rng.random_range(0..pool.len())]);
    }
    origin_map
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
    config: ForestConfig,
    feature_names: Vec<String>,
    n_rows: usize,
    origin_map: Vec<usize>,
}

/// Trains `config.ntree` trees. Tree `t` uses the stream
/// `config.seed -> TREE -> t`; the over-sampling draw uses
/// `config.seed -> OVERSAMPLE`.
pub fn fit_forest(dataset: &Dataset, config: &ForestConfig) -> Result<Forest> {
    config.validate(dataset.p())?;
    let origin_map = match config.sampling {
        Sampling::Over => oversample_origin_map(dataset, &mut config.seed.derive(tag::OVERSAMPLE).rng()),
        Sampling::None | Sampling::Under => (0..dataset.n()).collect(),
    };
    let ranks = RankIndex::new(dataset);
    let params = GrowParams {
        mtry: config.resolved_mtry(dataset.p()),
        min_leaf_size: config.min_leaf_size as u32,
    };
    let trees = (0..config.ntree)
        .into_par_iter()
        .map(|t| {
            let mut rng = config.seed.derive2(tag::TREE, t as u64).rng();
            let sample = draw_training_sample(dataset, &origin_map, config.sampling, &mut rng);
            let mut weights = vec![0u32; dataset.n()];
            for (r, &c) in sample.in_bag.iter().enumerate() {
                weights[origin_map[r]] += c;
            }
            let rows = (0..dataset.n() as u32)
                .filter(|&i| weights[i as usize] > 0)
                .collect();
            let nodes = grow(dataset, &ranks, &weights, rows, &params, &mut rng);
            let oob = match config.oob_rule {
                OobRule::TrainingRow => (0..origin_map.len()).filter(|&r| sample.in_bag[r] == 0).collect(),
                OobRule::OriginalRow => sample.oob_original,
            };
            Tree::from_parts(nodes, sample.in_bag, oob)
        })
        .collect();
    Ok(Forest {
        trees,
        config: *config,
        feature_names: dataset.feature_names().to_vec(),
        n_rows: dataset.n(),
        origin_map,
    })
}

/// Aggregated out-of-bag scores per evaluation unit.
#[derive(Debug, Clone, PartialEq)]
pub struct OobPredictions {
    /// Dataset row behind each unit.
    pub rows: Vec<usize>,
    pub labels: Vec<u8>,
    /// Mean class-1 probability over the trees for which the unit is out of
    /// bag; `None` when no tree has it out of bag.
    pub scores: Vec<Option<f64>>,
}

impl OobPredictions {
    pub fn uncovered(&self) -> usize {
        self.scores.iter().filter(|s| s.is_none()).count()
    }

    /// Scores and labels of the covered units.
    pub fn covered(&self) -> (Vec<f64>, Vec<u8>) {
        self.scores
            .iter()
            .zip(&self.labels)
            .filter_map(|(s, &y)| s.map(|s| (s, y)))
            .unzip()
    }

    /// AUC over covered units.
    pub fn auc(&self) -> Result<f64> {
        let (s, y) = self.covered();
        crate::metrics::auc(&s, &y)
    }

    /// `1 - accuracy` over covered units.
    pub fn error_rate(&self) -> Result<f64> {
        let (s, y) = self.covered();
        if s.is_empty() {
            return Err(Error::InvalidDataset("no out-of-bag coverage".into()));
        }
        Ok(1.0 - crate::metrics::accuracy(&s, &y, 0.5))
    }
}

impl Forest {
    /// Assembles a forest from trees whose OOB sets are already computed.
    pub fn from_parts(
        trees: Vec<Tree>,
        config: ForestConfig,
        feature_names: Vec<String>,
        n_rows: usize,
        origin_map: Vec<usize>,
    ) -> Self {
        Forest {
            trees,
            config,
            feature_names,
            n_rows,
            origin_map,
        }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn origin_map(&self) -> &[usize] {
        &self.origin_map
    }

    /// Dataset row behind each out-of-bag evaluation unit.
    pub fn unit_rows(&self) -> Cow<'_, [usize]> {
        match self.config.oob_rule {
            OobRule::TrainingRow => Cow::Borrowed(&self.origin_map),
            OobRule::OriginalRow => Cow::Owned((0..self.n_rows).collect()),
        }
    }

    pub(crate) fn check_shape(&self, dataset: &Dataset) -> Result<()> {
        if dataset.n() != self.n_rows || dataset.p() != self.n_features() {
            return Err(Error::ShapeMismatch(format!(
                "forest trained on {}x{}, dataset is {}x{}",
                self.n_rows,
                self.n_features(),
                dataset.n(),
                dataset.p()
            )));
        }
        Ok(())
    }

    /// Mean class-1 probability over all trees.
    pub fn predict_proba(&self, values: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_values(values)).sum();
        sum / self.trees.len() as f64
    }

    pub fn predict_dataset(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        if dataset.p() != self.n_features() {
            return Err(Error::ShapeMismatch(format!(
                "forest has {} features, dataset {}",
                self.n_features(),
                dataset.p()
            )));
        }
        Ok((0..dataset.n())
            .map(|i| {
                let sum: f64 = self.trees.iter().map(|t| t.predict_row(dataset, i)).sum();
                sum / self.trees.len() as f64
            })
            .collect())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let doc = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            forest: Cow::Borrowed(self),
        };
        serde_json::to_writer(out, &doc)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Forest> {
        let doc: Checkpoint<'static> = serde_json::from_reader(input)?;
        if doc.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unexpected format `{}`", doc.format)));
        }
        if doc.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported version {} (expected {CHECKPOINT_VERSION})",
                doc.version
            )));
        }
        Ok(doc.forest.into_owned())
    }
}

const CHECKPOINT_FORMAT: &str = "rfvi-forest";
const CHECKPOINT_VERSION: u32 = 1;

/// JSON checkpoint: `{"format": "rfvi-forest", "version": 1, "forest": {...}}`.
/// Floats are written in shortest round-trip form and parsed exactly.
#[derive(Serialize, Deserialize)]
struct Checkpoint<'a> {
    format: String,
    version: u32,
    forest: Cow<'a, Forest>,
}

/// Out-of-bag class-1 scores per evaluation unit (see [`Forest::unit_rows`]).
pub fn oob_predictions(forest: &Forest, dataset: &Dataset) -> Result<OobPredictions> {
    forest.check_shape(dataset)?;
    let rows = forest.unit_rows().into_owned();
    let mut sum = vec![0.0; rows.len()];
    let mut count = vec![0u32; rows.len()];
    for tree in forest.trees() {
        for &u in tree.oob() {
            sum[u] += tree.predict_row(dataset, rows[u]);
            count[u] += 1;
        }
    }
    let scores = sum
        .iter()
        .zip(&count)
        .map(|(&s, &c)| (c > 0).then(|| s / f64::from(c)))
        .collect();
    let labels = rows.iter().map(|&i| dataset.label(i)).collect();
    Ok(OobPredictions { rows, labels, scores })
}
