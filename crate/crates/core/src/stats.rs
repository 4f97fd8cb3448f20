//! Wilcoxon signed-rank test and the rank-band misclassification count.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::importance::rank_descending;
use crate::synth::EffectCategory;

/// Paired measurements `x[i]`, `y[i]`; differences are `x - y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::InvalidDataset(format!(
                "paired sample needs equal non-zero lengths, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("paired sample has non-finite values".into()));
        }
        Ok(PairedSample { x, y })
    }

    pub fn from_differences(d: &[f64]) -> Result<Self> {
        PairedSample::new(d.to_vec(), vec![0.0; d.len()])
    }

    pub fn swapped(&self) -> PairedSample {
        PairedSample {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    TwoSided,
    /// `x` tends to exceed `y`.
    Greater,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WilcoxonMethod {
    /// Exact when at most [`EXACT_MAX_N`] non-zero differences and no ties.
    #[default]
    Auto,
    Exact,
    Normal,
}

pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of the ranks of the positive differences.
    pub statistic: f64,
    pub p_value: f64,
    /// Non-zero differences.
    pub n: usize,
    pub exact: bool,
    /// Every difference is zero; `p_value` is 1.
    pub degenerate: bool,
}

pub fn wilcoxon_signed_rank(sample: &PairedSample, alternative: Alternative) -> WilcoxonResult {
    wilcoxon_signed_rank_with(sample, alternative, WilcoxonMethod::Auto)
}

/// Zero differences are dropped and tied `|d|` share their average rank.
/// The exact null distribution is computed by counting sign assignments
/// over the (doubled, hence integer) ranks; the normal approximation uses
/// tie and continuity corrections.
pub fn wilcoxon_signed_rank_with(
    sample: &PairedSample,
    alternative: Alternative,
    method: WilcoxonMethod,
) -> WilcoxonResult {
    let d: Vec<f64> = sample
        .x
        .iter()
        .zip(&sample.y)
        .map(|(a, b)| a - b)
        .filter(|&d| d != 0.0)
        .collect();
    let n = d.len();
    if n == 0 {
        return WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            n: 0,
            exact: false,
            degenerate: true,
        };
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()));
    // doubled ranks stay integral under averaging
    let mut rank2 = vec![0u64; n];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && d[order[j + 1]].abs() == d[order[i]].abs() {
            j += 1;
        }
        let avg2 = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            rank2[k] = avg2;
        }
        tie_sizes.push((j - i + 1) as f64);
        i = j + 1;
    }
    let has_ties = tie_sizes.iter().any(|&t| t > 1.0);
    let w2: u64 = (0..n).filter(|&k| d[k] > 0.0).map(|k| rank2[k]).sum();
    let statistic = w2 as f64 / 2.0;
    let exact = match method {
        WilcoxonMethod::Exact => true,
        WilcoxonMethod::Normal => false,
        WilcoxonMethod::Auto => n <= EXACT_MAX_N && !has_ties,
    };
    let (p_greater, p_less) = if exact {
        exact_tails(&rank2, w2)
    } else {
        normal_tails(n, statistic, &tie_sizes)
    };
    let p_value = match alternative {
        Alternative::Greater => p_greater,
        Alternative::Less => p_less,
        Alternative::TwoSided => 2.0 * p_greater.min(p_less),
    }
    .clamp(0.0, 1.0);
    WilcoxonResult {
        statistic,
        p_value,
        n,
        exact,
        degenerate: false,
    }
}

/// `(P(W >= w), P(W <= w))` by subset-sum counting over doubled ranks.
fn exact_tails(rank2: &[u64], w2: u64) -> (f64, f64) {
    let total: usize = rank2.iter().sum::<u64>() as usize;
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in rank2 {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let all = 2f64.powi(rank2.len() as i32);
    let w2 = w2 as usize;
    let ge: f64 = counts[w2..].iter().sum();
    let le: f64 = counts[..=w2].iter().sum();
    (ge / all, le / all)
}

fn normal_tails(n: usize, w: f64, tie_sizes: &[f64]) -> (f64, f64) {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_adj: f64 = tie_sizes.iter().map(|t| t * t * t - t).sum::<f64>() / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_adj;
    if var <= 0.0 {
        return (1.0, 1.0);
    }
    let sd = var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let greater = std_normal.sf((w - mean - 0.5) / sd);
    let less = std_normal.cdf((w - mean + 0.5) / sd);
    (greater.min(1.0), less.min(1.0))
}

/// Misclassified variables per true category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Misclassification {
    pub strong: usize,
    pub moderate: usize,
    pub weak: usize,
    pub noise: usize,
}

impl Misclassification {
    /// Strong + moderate + weak; noise is left out.
    pub fn total(&self) -> usize {
        self.strong + self.moderate + self.weak
    }

    pub fn triple(&self) -> (usize, usize, usize) {
        (self.strong, self.moderate, self.weak)
    }
}

/// Ranks variables by descending mean importance (ties by index) and gives
/// the variable at rank `r` the category whose band holds `r`. Bands are
/// consecutive, in [`EffectCategory::ALL`] order, sized by how often each
/// category occurs in `truth` (ranks 1-5, 6-10, 11-15, 16-30 by default).
pub fn rank_and_classify(mean_importance: &[f64], truth: &[EffectCategory]) -> Result<Misclassification> {
    if mean_importance.len() != truth.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} importances for {} categories",
            mean_importance.len(),
            truth.len()
        )));
    }
    let bands: Vec<EffectCategory> = EffectCategory::ALL
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, truth.iter().filter(|&&t| t == c).count()))
        .collect();
    let mut out = Misclassification::default();
    for (rank, var) in rank_descending(mean_importance).into_iter().enumerate() {
        if bands[rank] != truth[var] {
            match truth[var] {
                EffectCategory::Strong => out.strong += 1,
                EffectCategory::Moderate => out.moderate += 1,
                EffectCategory::Weak => out.weak += 1,
                EffectCategory::Noise => out.noise += 1,
            }
        }
    }
    Ok(out)
}
