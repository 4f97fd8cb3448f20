//! Cross-validated selection benchmark followed by the pairwise comparison.

use rfvi::experiment::{run_cv_benchmark, run_pairwise_comparison, CvBenchmarkConfig};

const CONFIG: &str = r#"
selectors = ["diaz-uri", "calle", "auc", "auc-over"]
replicates = 4
seed = 3

[forest]
ntree = 100

[[datasets]]
kind = "generator"
generator = "twonorm"
n = 300
d = 10

[[datasets]]
kind = "generator"
generator = "circle"
n = 300
d = 10
"#;

fn main() -> rfvi::Result<()> {
    let cfg = CvBenchmarkConfig::from_toml_str(CONFIG)?;
    let report = run_cv_benchmark(&cfg)?;
    for info in &report.datasets {
        for &selector in &cfg.selectors {
            let auc = report.statistic(&info.name, selector, "cv_auc").map_or(f64::NAN, |r| r.value);
            println!("{:<10} {:<10} CV-AUC {auc:.4}", info.name, selector.display_name());
        }
    }
    let rows: Vec<_> = report.replicates.iter().map(Into::into).collect();
    print!("{}", run_pairwise_comparison(&rows, 0.05)?.render());
    Ok(())
}
