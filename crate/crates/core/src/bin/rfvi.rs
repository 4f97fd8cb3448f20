use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rfvi::experiment::{
    read_replicates_csv, run_cv_benchmark, run_monte_carlo, run_pairwise_comparison, CvBenchmarkConfig,
    MonteCarloConfig,
};
use rfvi::importance::{measure_importance, ImportanceMethod};
use rfvi::selection::{select_optimal, Selector};
use rfvi::synth::{gen_benchmark, gen_simulation, BenchmarkName, BenchmarkSpec, SimulationConfig};
use rfvi::{load_csv, EncodingPolicy, Error, ForestConfig, Result, SeedSpec};

#[derive(Parser)]
#[command(name = "rfvi", version, about = "Random-forest variable importance and selection under class imbalance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Name of the label column.
    #[arg(long)]
    label: String,
    /// Label value of the positive class.
    #[arg(long)]
    positive: String,
    #[arg(long, default_value = "one-hot")]
    encoding: EncodingPolicy,
}

impl DataArgs {
    fn load(&self) -> Result<rfvi::Dataset> {
        load_csv(&self.data, &self.label, &self.positive, self.encoding)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a simulated dataset (or a benchmark with --benchmark) as CSV.
    Simulate {
        #[arg(long)]
        n: usize,
        /// Imbalance ratio of the block simulation.
        #[arg(long, default_value_t = 1.0)]
        ir: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// twonorm, ringnorm, threenorm or circle instead of the block design.
        #[arg(long)]
        benchmark: Option<BenchmarkName>,
        /// Dimension of a benchmark.
        #[arg(long, default_value_t = 10)]
        d: usize,
        #[arg(long, default_value = "y")]
        label: String,
    },
    /// Measure variable importance.
    Importance {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        method: ImportanceMethod,
        #[arg(long, default_value_t = 200)]
        ntree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select a feature set.
    Select {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        method: Selector,
        /// Interval multiplier.
        #[arg(long, default_value_t = 2.0)]
        u: f64,
        #[arg(long, default_value_t = 200)]
        ntree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON summary.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the Monte Carlo importance study.
    McStudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides `workers` in the config.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the cross-validated selection benchmark.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Pairwise comparison of a benchmark's replicates.csv.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            n,
            ir,
            seed,
            out,
            benchmark,
            d,
            label,
        } => {
            let ds = match benchmark {
                Some(name) => gen_benchmark(&BenchmarkSpec::new(name, n, d), SeedSpec(seed))?,
                None => gen_simulation(&SimulationConfig::new(n, ir), SeedSpec(seed))?,
            };
            ds.write_csv(&out, &label)
        }
        Command::Importance {
            data,
            method,
            ntree,
            seed,
            out,
        } => {
            let ds = data.load()?;
            let config = ForestConfig::default().with_ntree(ntree);
            let report = measure_importance(&ds, method, &config, SeedSpec(seed))?;
            report.write_csv(create(&out)?)
        }
        Command::Select {
            data,
            method,
            u,
            ntree,
            seed,
            out,
        } => {
            let ds = data.load()?;
            let config = ForestConfig::default().with_ntree(ntree);
            let result = select_optimal(&ds, method, &config, SeedSpec(seed), u)?;
            result.write_json(create(&out)?)?;
            println!("{}", result.selected_names().join(","));
            Ok(())
        }
        Command::McStudy {
            config,
            out_dir,
            workers,
        } => {
            let mut cfg = MonteCarloConfig::from_file(&config)?;
            cfg.workers = workers.or(cfg.workers);
            let report = run_monte_carlo(&cfg)?;
            report.write_to_dir(&out_dir)?;
            print!("{}", std::fs::read_to_string(out_dir.join("table.txt")).unwrap_or_default());
            if report.failures.is_empty() {
                Ok(())
            } else {
                Err(Error::InvalidDataset(format!(
                    "{} replicate(s) failed; see failures.csv",
                    report.failures.len()
                )))
            }
        }
        Command::Benchmark {
            config,
            out_dir,
            workers,
        } => {
            let mut cfg = CvBenchmarkConfig::from_file(&config)?;
            cfg.workers = workers.or(cfg.workers);
            let report = run_cv_benchmark(&cfg)?;
            report.write_to_dir(&out_dir)?;
            print!("{}", std::fs::read_to_string(out_dir.join("table.txt")).unwrap_or_default());
            if report.failures.is_empty() {
                Ok(())
            } else {
                Err(Error::InvalidDataset(format!(
                    "{} fold run(s) failed; see failures.csv",
                    report.failures.len()
                )))
            }
        }
        Command::Compare { input, alpha, out } => {
            let file = File::open(&input).map_err(|e| Error::Io {
                path: input.clone(),
                source: e,
            })?;
            let rows = read_replicates_csv(file)?;
            let table = run_pairwise_comparison(&rows, alpha)?;
            table.write_csv(create(&out)?)?;
            print!("{}", table.render());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_usage_error() {
                1
            } else if e.is_data_error() {
                2
            } else {
                3
            };
            ExitCode::from(code)
        }
    }
}
