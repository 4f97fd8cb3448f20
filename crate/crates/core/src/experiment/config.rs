//! Study configuration files.
//!
//! Configs are TOML. Every field is optional and falls back to the study
//! default; unknown keys are rejected. A Monte Carlo config:
//!
//! ```toml
//! n_grid = [50, 100]
//! ir_grid = [1.0, 20.0]
//! replicates = 100
//! methods = ["gini", "perm-auc-over"]
//! seed = 7
//! workers = 4
//!
//! [forest]
//! ntree = 200
//! ```
//!
//! A CV benchmark config lists its datasets as an array of tables, either
//! generated or read from CSV (paths relative to the config file):
//!
//! ```toml
//! selectors = ["auc", "auc-over", "calle"]
//! folds = 5
//! replicates = 50
//!
//! [[datasets]]
//! kind = "generator"
//! generator = "twonorm"
//! n = 1000
//! d = 10
//!
//! [[datasets]]
//! kind = "csv"
//! name = "credit"
//! path = "credit.csv"
//! label = "class"
//! positive = "bad"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{load_csv, Dataset, EncodingPolicy};
use crate::error::{Error, Result};
use crate::forest::ForestConfig;
use crate::importance::{ImportanceMethod, DEFAULT_U};
use crate::seed::{name_tag, tag, SeedSpec};
use crate::selection::Selector;
use crate::synth::{gen_benchmark, BenchmarkName, BenchmarkSpec, RadiusPolicy, SimulationConfig};

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(toml::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub n_grid: Vec<usize>,
    pub ir_grid: Vec<f64>,
    pub replicates: usize,
    pub methods: Vec<ImportanceMethod>,
    /// Minority means of the strong, moderate, weak and noise blocks.
    pub effect_means: [f64; 4],
    /// The seed inside is ignored; forest seeds derive from `seed`.
    pub forest: ForestConfig,
    pub seed: u64,
    /// Thread count; `None` uses every core. Results do not depend on it.
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            n_grid: vec![50, 100, 250, 500],
            ir_grid: vec![1.0, 2.0, 10.0, 20.0],
            replicates: 100,
            methods: ImportanceMethod::ALL.to_vec(),
            effect_means: SimulationConfig::new(50, 1.0).effect_means,
            forest: ForestConfig::default(),
            seed: 0,
            workers: None,
        }
    }
}

impl MonteCarloConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: Self = read_config(path.as_ref())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.n_grid.is_empty() || self.ir_grid.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidConfig("n_grid, ir_grid and methods must be nonempty".into()));
        }
        for &n in &self.n_grid {
            for &ir in &self.ir_grid {
                let mut sim = SimulationConfig::new(n, ir);
                sim.effect_means = self.effect_means;
                // a throwaway draw runs every validation rule
                crate::synth::gen_simulation(&sim, SeedSpec(0))?;
            }
        }
        check_workers(self.workers)
    }

    pub fn simulation(&self, n: usize, ir: f64) -> SimulationConfig {
        let mut sim = SimulationConfig::new(n, ir);
        sim.effect_means = self.effect_means;
        sim
    }
}

fn check_workers(workers: Option<usize>) -> Result<()> {
    if workers == Some(0) {
        return Err(Error::InvalidConfig("workers must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSource {
    Generator {
        generator: BenchmarkName,
        #[serde(default)]
        name: Option<String>,
        n: usize,
        d: usize,
        /// Circle radius; the half-volume radius when absent.
        #[serde(default)]
        radius: Option<f64>,
    },
    Csv {
        name: Option<String>,
        path: PathBuf,
        label: String,
        positive: String,
        #[serde(default)]
        encoding: EncodingPolicy,
    },
}

impl DatasetSource {
    pub fn generator(name: BenchmarkName, n: usize, d: usize) -> Self {
        DatasetSource::Generator {
            generator: name,
            name: None,
            n,
            d,
            radius: None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            DatasetSource::Generator {
                name: Some(name), ..
            }
            | DatasetSource::Csv {
                name: Some(name), ..
            } => name.clone(),
            DatasetSource::Generator { generator, .. } => generator.as_str().to_string(),
            DatasetSource::Csv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }

    /// Generated datasets are drawn once per study from the master seed and
    /// the dataset name.
    pub fn load(&self, base_dir: &Path, seed: SeedSpec) -> Result<Dataset> {
        match self {
            DatasetSource::Generator {
                generator, n, d, radius, ..
            } => {
                let spec = BenchmarkSpec {
                    name: *generator,
                    n: *n,
                    d: *d,
                    radius: radius.map_or(RadiusPolicy::HalfVolume, RadiusPolicy::Explicit),
                };
                gen_benchmark(&spec, seed.derive2(tag::SIMULATE, name_tag(&self.name())))
            }
            DatasetSource::Csv {
                path,
                label,
                positive,
                encoding,
                ..
            } => load_csv(base_dir.join(path), label, positive, *encoding),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvBenchmarkConfig {
    pub datasets: Vec<DatasetSource>,
    pub selectors: Vec<Selector>,
    pub folds: usize,
    pub replicates: usize,
    /// Interval multiplier for the proposed selectors.
    pub u: f64,
    pub forest: ForestConfig,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
    /// Directory CSV paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for CvBenchmarkConfig {
    fn default() -> Self {
        CvBenchmarkConfig {
            datasets: Vec::new(),
            selectors: Selector::ALL.to_vec(),
            folds: 5,
            replicates: 50,
            u: DEFAULT_U,
            forest: ForestConfig::default(),
            seed: 0,
            workers: None,
            base_dir: PathBuf::from("."),
        }
    }
}

impl CvBenchmarkConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg: Self = read_config(path)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.datasets.is_empty() || self.selectors.is_empty() {
            return Err(Error::InvalidConfig("datasets and selectors must be nonempty".into()));
        }
        if !(self.u.is_finite() && self.u >= 0.0) {
            return Err(Error::InvalidConfig(format!("u must be non-negative, got {}", self.u)));
        }
        let mut names: Vec<String> = self.datasets.iter().map(DatasetSource::name).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!("dataset name `{}` used twice", w[0])));
        }
        check_workers(self.workers)
    }
}
