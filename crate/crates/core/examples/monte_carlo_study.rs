//! A small Monte Carlo grid; pass a directory to keep the report files.

use rfvi::experiment::{run_monte_carlo, MonteCarloConfig};
use rfvi::ForestConfig;

fn main() -> rfvi::Result<()> {
    let cfg = MonteCarloConfig {
        n_grid: vec![50, 100],
        ir_grid: vec![1.0, 10.0],
        replicates: 10,
        forest: ForestConfig::default().with_ntree(100),
        seed: 1,
        ..MonteCarloConfig::default()
    };
    let report = run_monte_carlo(&cfg)?;
    for cell in &report.cells {
        println!("{:<14} {:<14} {:?}", cell.setting, cell.method.display_name(), cell.misclassification.triple());
    }
    if let Some(dir) = std::env::args().nth(1) {
        report.write_to_dir(&dir)?;
        println!("report written to {dir}");
    }
    Ok(())
}
