//! Fits forests under each sampling mode, scores them out of bag and
//! round-trips one through a JSON checkpoint.

use rfvi::synth::{gen_simulation, SimulationConfig};
use rfvi::{fit_forest, oob_predictions, Forest, ForestConfig, Sampling, SeedSpec};

fn main() -> rfvi::Result<()> {
    let ds = gen_simulation(&SimulationConfig::new(200, 10.0), SeedSpec(3))?;
    for sampling in [Sampling::None, Sampling::Under, Sampling::Over] {
        let cfg = ForestConfig::default().with_sampling(sampling).with_seed(SeedSpec(1));
        let forest = fit_forest(&ds, &cfg)?;
        let oob = oob_predictions(&forest, &ds)?;
        println!(
            "{:<5} OOB AUC {:.3}  error {:.3}  uncovered rows {}",
            sampling.as_str(),
            oob.auc()?,
            oob.error_rate()?,
            oob.uncovered()
        );
    }

    let forest = fit_forest(&ds, &ForestConfig::default().with_ntree(20))?;
    let mut buf = Vec::new();
    forest.write_json(&mut buf)?;
    let restored = Forest::read_json(&buf[..])?;
    assert_eq!(restored.predict_dataset(&ds)?, forest.predict_dataset(&ds)?);
    println!("checkpoint: {} bytes, predictions identical", buf.len());
    Ok(())
}
