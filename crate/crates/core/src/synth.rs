//! Synthetic data: the block-effect simulation design and four classic
//! two-class benchmark distributions.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::data::{default_names, Dataset};
use crate::error::{Error, Result};
use crate::seed::{Rng, SeedSpec};

/// True effect category of a simulated variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectCategory {
    Strong,
    Moderate,
    Weak,
    Noise,
}

impl EffectCategory {
    pub const ALL: [EffectCategory; 4] = [
        EffectCategory::Strong,
        EffectCategory::Moderate,
        EffectCategory::Weak,
        EffectCategory::Noise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EffectCategory::Strong => "strong",
            EffectCategory::Moderate => "moderate",
            EffectCategory::Weak => "weak",
            EffectCategory::Noise => "noise",
        }
    }
}

/// Block design: every majority row is `N(0, sigma^2)` in every column;
/// minority rows have mean `effect_means[b]` in the columns of block `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Total sample size.
    pub n: usize,
    /// Requested imbalance ratio `n0 / n1`.
    pub ir: f64,
    /// Minority means for the strong, moderate, weak and noise blocks.
    pub effect_means: [f64; 4],
    pub block_sizes: [usize; 4],
    pub sigma: f64,
}

impl SimulationConfig {
    pub fn new(n: usize, ir: f64) -> Self {
        SimulationConfig {
            n,
            ir,
            effect_means: [1.0, 0.75, 0.5, 0.0],
            block_sizes: [5, 5, 5, 15],
            sigma: 1.0,
        }
    }

    pub fn p(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// `(n0, n1)` with `n1 = max(2, round_half_up(n / (ir + 1)))`.
    pub fn class_sizes(&self) -> (usize, usize) {
        let n1 = ((self.n as f64 / (self.ir + 1.0) + 0.5).floor() as usize).max(2);
        (self.n.saturating_sub(n1), n1)
    }

    /// Category of each column, in column order.
    pub fn categories(&self) -> Vec<EffectCategory> {
        EffectCategory::ALL
            .iter()
            .zip(self.block_sizes)
            .flat_map(|(&c, size)| std::iter::repeat_n(c, size))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::InvalidConfig(format!("simulation needs N >= 10, got {}", self.n)));
        }
        if !(self.ir.is_finite() && self.ir >= 1.0) {
            return Err(Error::InvalidConfig(format!("imbalance ratio must be >= 1, got {}", self.ir)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidConfig("sigma must be positive".into()));
        }
        if self.effect_means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidConfig("effect means must be finite".into()));
        }
        if self.p() == 0 {
            return Err(Error::InvalidConfig("no simulated variables".into()));
        }
        let (n0, n1) = self.class_sizes();
        if n0 < n1 {
            return Err(Error::InvalidConfig(format!(
                "N={} too small for two minority rows at IR={}",
                self.n, self.ir
            )));
        }
        Ok(())
    }
}

/// Draws one simulated dataset. Rows `0..n0` are majority (label 0), the
/// remaining `n1` rows minority (label 1). Columns are named `X1..Xp`.
pub fn gen_simulation(config: &SimulationConfig, seed: SeedSpec) -> Result<Dataset> {
    config.validate()?;
    let (n0, n1) = config.class_sizes();
    let n = n0 + n1;
    let p = config.p();
    let means: Vec<f64> = config
        .effect_means
        .iter()
        .zip(config.block_sizes)
        .flat_map(|(&m, size)| std::iter::repeat_n(m, size))
        .collect();
    let mut rng = seed.rng();
    let mut columns = vec![vec![0.0; n]; p];
    for i in 0..n {
        let minority = i >= n0;
        for (j, col) in columns.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            col[i] = if minority { means[j] } else { 0.0 } + config.sigma * z;
        }
    }
    let labels = (0..n).map(|i| u8::from(i >= n0)).collect();
    Dataset::from_columns(columns, labels, default_names(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkName {
    Ringnorm,
    Twonorm,
    Threenorm,
    Circle,
}

impl BenchmarkName {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkName::Ringnorm => "ringnorm",
            BenchmarkName::Twonorm => "twonorm",
            BenchmarkName::Threenorm => "threenorm",
            BenchmarkName::Circle => "circle",
        }
    }
}

impl FromStr for BenchmarkName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ringnorm" | "rng" => Ok(BenchmarkName::Ringnorm),
            "twonorm" | "twn" => Ok(BenchmarkName::Twonorm),
            "threenorm" | "trn" => Ok(BenchmarkName::Threenorm),
            "circle" | "cir" => Ok(BenchmarkName::Circle),
            other => Err(Error::UnknownName {
                kind: "benchmark",
                name: other.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusPolicy {
    /// Radius at which the (untruncated) ball has half the cube's volume.
    /// For `d >= 5` the radius exceeds 1, the cube clips the ball, and fewer
    /// than half the points fall inside (about 32% at `d = 10`).
    #[default]
    HalfVolume,
    Explicit(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub name: BenchmarkName,
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub radius: RadiusPolicy,
}

impl BenchmarkSpec {
    pub fn new(name: BenchmarkName, n: usize, d: usize) -> Self {
        BenchmarkSpec {
            name,
            n,
            d,
            radius: RadiusPolicy::HalfVolume,
        }
    }

    /// Mean offset `2 / sqrt(d)`, which keeps the distance between class
    /// means at 4 for every `d`.
    pub fn offset(&self) -> f64 {
        2.0 / (self.d as f64).sqrt()
    }

    pub fn circle_radius(&self) -> f64 {
        match self.radius {
            RadiusPolicy::Explicit(r) => r,
            RadiusPolicy::HalfVolume => half_volume_radius(self.d),
        }
    }
}

/// `r` with `pi^(d/2) r^d / Gamma(d/2 + 1) = 2^d / 2`.
pub fn half_volume_radius(d: usize) -> f64 {
    let d = d as f64;
    let ln_r = ((d - 1.0) * 2f64.ln() + ln_gamma(d / 2.0 + 1.0) - d / 2.0 * PI.ln()) / d;
    ln_r.exp()
}

/// Draws a benchmark dataset. For the three Gaussian problems the first
/// `n - n/2` rows are class 0 and the last `n/2` rows class 1; circle labels
/// follow the geometry.
pub fn gen_benchmark(spec: &BenchmarkSpec, seed: SeedSpec) -> Result<Dataset> {
    if spec.n < 10 || spec.d < 2 {
        return Err(Error::InvalidConfig(format!(
            "benchmark needs n >= 10 and d >= 2, got n={} d={}",
            spec.n, spec.d
        )));
    }
    let (n, d) = (spec.n, spec.d);
    let a = spec.offset();
    let mut rng = seed.rng();
    let mut columns = vec![vec![0.0; n]; d];
    let mut labels = vec![0u8; n];
    let n1 = n / 2;
    let normal = |rng: &mut Rng| -> f64 { rng.sample(StandardNormal) };
    match spec.name {
        BenchmarkName::Twonorm => {
            for i in 0..n {
                let y = u8::from(i >= n - n1);
                labels[i] = y;
                let mu = if y == 1 { a } else { -a };
                for col in columns.iter_mut() {
                    col[i] = mu + normal(&mut rng);
                }
            }
        }
        BenchmarkName::Ringnorm => {
            for i in 0..n {
                let y = u8::from(i >= n - n1);
                labels[i] = y;
                for col in columns.iter_mut() {
                    let z = normal(&mut rng);
                    col[i] = if y == 1 { a + z } else { 2.0 * z };
                }
            }
        }
        BenchmarkName::Threenorm => {
            for i in 0..n {
                let y = u8::from(i >= n - n1);
                labels[i] = y;
                let sign = if y == 0 && rng.random_bool(0.5) { -1.0 } else { 1.0 };
                for (j, col) in columns.iter_mut().enumerate() {
                    let mu = if y == 1 {
                        if j % 2 == 0 {
                            a
                        } else {
                            -a
                        }
                    } else {
                        sign * a
                    };
                    col[i] = mu + normal(&mut rng);
                }
            }
        }
        BenchmarkName::Circle => {
            let r2 = spec.circle_radius().powi(2);
            for i in 0..n {
                let mut norm2 = 0.0;
                for col in columns.iter_mut() {
                    let x: f64 = rng.random_range(-1.0..=1.0);
                    col[i] = x;
                    norm2 += x * x;
                }
                labels[i] = u8::from(norm2 <= r2);
            }
        }
    }
    Dataset::from_columns(columns, labels, default_names(d))
}
