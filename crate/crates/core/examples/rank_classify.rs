//! Scores a mean importance vector against the true effect blocks.

use rfvi::importance::{measure_importance, ImportanceMethod};
use rfvi::stats::rank_and_classify;
use rfvi::synth::{gen_simulation, SimulationConfig};
use rfvi::{ForestConfig, SeedSpec};

fn main() -> rfvi::Result<()> {
    let cfg = SimulationConfig::new(100, 20.0);
    let truth = cfg.categories();
    let forest = ForestConfig::default().with_ntree(100);
    let reps = 10;
    for method in [ImportanceMethod::Gini, ImportanceMethod::PermAccu, ImportanceMethod::PermAucOver] {
        let mut mean = vec![0.0; cfg.p()];
        for r in 0..reps {
            let ds = gen_simulation(&cfg, SeedSpec(r))?;
            let values = measure_importance(&ds, method, &forest, SeedSpec(r))?.values();
            for (m, v) in mean.iter_mut().zip(values) {
                *m += v / reps as f64;
            }
        }
        let mis = rank_and_classify(&mean, &truth)?;
        println!("{:<14} misclassified (strong, moderate, weak) = {:?}", method.display_name(), mis.triple());
    }
    Ok(())
}
