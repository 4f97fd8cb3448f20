//! Interval-driven selection with the three proposed selectors.

use rfvi::selection::{select_optimal, Selector};
use rfvi::synth::{gen_simulation, SimulationConfig};
use rfvi::{ForestConfig, SeedSpec};

fn main() -> rfvi::Result<()> {
    let ds = gen_simulation(&SimulationConfig::new(250, 5.0), SeedSpec(5))?;
    for selector in [Selector::Auc, Selector::AucUnder, Selector::AucOver] {
        let result = select_optimal(&ds, selector, &ForestConfig::default(), SeedSpec(1), 2.0)?;
        println!("{} ({} candidates)", selector.display_name(), result.n_candidates);
        for c in &result.candidates {
            println!("  size {:>2}  OOB AUC {}", c.len(), c.oob_auc.map_or("-".into(), |a| format!("{a:.4}")));
        }
        println!("  selected: {}", result.selected_names().join(" "));
    }
    Ok(())
}
