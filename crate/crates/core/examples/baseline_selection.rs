//! Backward elimination with a fixed drop rate, ranked once up front.

use rfvi::selection::{baseline_backward_select, baseline_sizes, BaselineRanking, Criterion, DEFAULT_DROP_RATE};
use rfvi::synth::{gen_simulation, SimulationConfig};
use rfvi::{ForestConfig, SeedSpec};

fn main() -> rfvi::Result<()> {
    let ds = gen_simulation(&SimulationConfig::new(200, 2.0), SeedSpec(6))?;
    println!("sizes: {:?}", baseline_sizes(ds.p(), DEFAULT_DROP_RATE));
    let runs = [
        ("PermAccu / OOB error", BaselineRanking::PermAccu, Criterion::OobErrorMin),
        ("Gini / OOB AUC", BaselineRanking::Gini, Criterion::OobAucMax),
    ];
    for (label, ranking, criterion) in runs {
        let result = baseline_backward_select(&ds, ranking, criterion, DEFAULT_DROP_RATE, &ForestConfig::default(), SeedSpec(1))?;
        println!("{label}: {}", result.selected_names().join(" "));
    }
    Ok(())
}
