//! Loads a CSV with a categorical column and a string label.

use rfvi::{load_csv, EncodingPolicy};

fn main() -> rfvi::Result<()> {
    let path = std::env::temp_dir().join("rfvi_load_example.csv");
    std::fs::write(
        &path,
        "age,colour,outcome\n31,red,no\n45,blue,yes\n27,green,no\n52,blue,yes\n38,red,no\n",
    )
    .map_err(|e| rfvi::Error::Io { path: path.clone(), source: e })?;
    for encoding in [EncodingPolicy::OneHot, EncodingPolicy::Integer] {
        let ds = load_csv(&path, "outcome", "yes", encoding)?;
        println!("{encoding:?}: columns {:?}, labels {:?}", ds.feature_names(), ds.labels());
    }
    Ok(())
}
