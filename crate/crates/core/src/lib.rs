pub mod data;
pub mod error;
pub mod experiment;
pub mod forest;
pub mod importance;
pub mod metrics;
pub mod seed;
pub mod selection;
pub mod stats;
pub mod synth;
pub mod tree;

pub use data::{imbalance_ratio, load_csv, stratified_kfold, Dataset, EncodingPolicy, FoldAssignment};
pub use error::{Error, Result};
pub use forest::{fit_forest, oob_predictions, Forest, ForestConfig, OobRule, Sampling};
pub use seed::SeedSpec;
