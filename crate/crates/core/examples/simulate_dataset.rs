//! Draws the block simulation and reports its class sizes.

use rfvi::synth::{gen_simulation, SimulationConfig};
use rfvi::{imbalance_ratio, SeedSpec};

fn main() -> rfvi::Result<()> {
    let cfg = SimulationConfig::new(100, 10.0);
    let ds = gen_simulation(&cfg, SeedSpec(7))?;
    let (n0, n1) = ds.class_counts();
    println!("{} rows, {} variables, {n0} majority / {n1} minority, IR {:.2}", ds.n(), ds.p(), imbalance_ratio(&ds));
    for (name, cat) in ds.feature_names().iter().zip(cfg.categories()).step_by(5) {
        println!("{name}: {}", cat.as_str());
    }
    let out = std::env::temp_dir().join("rfvi_simulated.csv");
    ds.write_csv(&out, "y")?;
    println!("written to {}", out.display());
    Ok(())
}
