//! The four synthetic benchmark problems.

use rfvi::synth::{gen_benchmark, BenchmarkName, BenchmarkSpec};
use rfvi::{imbalance_ratio, SeedSpec};

fn main() -> rfvi::Result<()> {
    for name in [BenchmarkName::Twonorm, BenchmarkName::Threenorm, BenchmarkName::Ringnorm, BenchmarkName::Circle] {
        let spec = BenchmarkSpec::new(name, 1000, 10);
        let ds = gen_benchmark(&spec, SeedSpec(1))?;
        println!("{:<10} n={} d={} IR={:.2}", name.as_str(), ds.n(), ds.p(), imbalance_ratio(&ds));
    }
    Ok(())
}
