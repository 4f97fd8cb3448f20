//! All five importance measures on one imbalanced sample, sharing a forest
//! per sampling mode.

use rfvi::importance::{measure_importances, ImportanceMethod};
use rfvi::synth::{gen_simulation, SimulationConfig};
use rfvi::{ForestConfig, SeedSpec};

fn main() -> rfvi::Result<()> {
    let ds = gen_simulation(&SimulationConfig::new(250, 10.0), SeedSpec(11))?;
    let reports = measure_importances(&ds, &ImportanceMethod::ALL, &ForestConfig::default(), SeedSpec(2))?;
    for report in &reports {
        let top: Vec<&str> = report.ranking()[..8].iter().map(|&j| report.records[j].name.as_str()).collect();
        println!("{:<14} {}", report.method.display_name(), top.join(" "));
    }
    Ok(())
}
