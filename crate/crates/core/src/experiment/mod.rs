//! Study drivers: the Monte Carlo importance study, the cross-validated
//! selection benchmark and the pairwise comparison of its results.

pub mod benchmark;
pub mod compare;
pub mod config;
pub mod monte_carlo;
pub mod report;

pub use benchmark::{run_cv_benchmark, BenchmarkReport};
pub use compare::{read_replicates_csv, run_pairwise_comparison, ComparisonTable};
pub use config::{CvBenchmarkConfig, DatasetSource, MonteCarloConfig};
pub use monte_carlo::{run_monte_carlo, MonteCarloReport};
pub use report::SummaryRow;

use crate::error::{Error, Result};

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub(crate) fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
