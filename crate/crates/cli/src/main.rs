use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xnestcv::hypothesis::{kfold_cv_test_with, reports_to_csv, reports_to_json};
use xnestcv::io::{load_dataset, read_sim_config, ResponseSource};
use xnestcv::sim::{evaluate_tests, run_sweep};
use xnestcv::{Error, LambdaGrid, Penalty, TestKind};

const KFOLD_BASE_SEED: u64 = 8891;

#[derive(Parser)]
#[command(name = "xnestcv", version, about = "Exhaustive nested cross-validation tests for ridge regression")]
struct Cli {
    /// Worker threads for the numeric kernels; 0 picks one per core.
    #[arg(long, global = true, env = "XNESTCV_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or all predictive-performance tests on a dataset.
    Test(TestArgs),
    /// Run a Monte Carlo sweep described by a TOML config.
    Simulate(SimulateArgs),
    /// Repeat the K-fold test over many fold assignments.
    KfoldInstability(InstabilityArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Feature matrix (CSV or TSV, one row per unit, optional header).
    #[arg(long)]
    x: PathBuf,
    /// Single-column response file.
    #[arg(long, conflicts_with = "y_column", required_unless_present = "y_column")]
    y: Option<PathBuf>,
    /// Response column inside the feature file, by header name or 1-based index.
    #[arg(long)]
    y_column: Option<String>,
}

impl DataArgs {
    fn source(&self) -> ResponseSource {
        match (&self.y, &self.y_column) {
            (Some(p), _) => ResponseSource::File(p.clone()),
            (None, Some(c)) => ResponseSource::Column(c.clone()),
            (None, None) => unreachable!("clap requires one response source"),
        }
    }
}

#[derive(Args)]
struct GridArgs {
    /// Explicit comma-separated ridge grid.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["grid_min", "grid_max", "grid_points"])]
    grid: Option<Vec<f64>>,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Leave the intercept out of the penalty by centering the features.
    #[arg(long)]
    center_intercept: bool,
}

impl GridArgs {
    fn grid(&self) -> Result<LambdaGrid, Error> {
        let as_config = |e: Error| Error::Config(e.to_string());
        if let Some(values) = &self.grid {
            return LambdaGrid::new(values.clone()).map_err(as_config);
        }
        if self.grid_min.is_none() && self.grid_max.is_none() && self.grid_points.is_none() {
            return Ok(LambdaGrid::default());
        }
        LambdaGrid::log_spaced(
            self.grid_min.unwrap_or(1e-3),
            self.grid_max.unwrap_or(2500.0),
            self.grid_points.unwrap_or(100),
        )
        .map_err(as_config)
    }

    fn penalty(&self) -> Penalty {
        if self.center_intercept {
            Penalty::UnpenalizedIntercept
        } else {
            Penalty::Full
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// t1cv, t2cv, t2cv_empirical, hybrid, wilcoxon, kfold or all.
    #[arg(long, default_value = "all")]
    test: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Folds for the K-fold test.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Fold-assignment seed for the K-fold test.
    #[arg(long, default_value_t = KFOLD_BASE_SEED)]
    seed: u64,
    /// Also write the report here.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    config: PathBuf,
    /// Directory for replicates.csv and summary.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct InstabilityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Number of fold assignments; seed s uses 8891 + s.
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Per-seed CSV destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidLambda(_) | Error::InvalidFolds(_) => 2,
        Error::Ingest { .. } | Error::Io(_) | Error::InvalidInput(_) | Error::InsufficientData { .. } => 3,
        Error::SingularTestBlock { .. }
        | Error::TooManyPartitions { .. }
        | Error::NoFeasibleLambda { .. }
        | Error::DegenerateVariance
        | Error::UndefinedDelta(_) => 4,
    }
}

fn check_alpha(alpha: f64) -> Result<(), Error> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

fn csv_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NA".to_string()
    }
}

fn write_out(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn cmd_test(args: &TestArgs) -> Result<(), Error> {
    check_alpha(args.alpha)?;
    let tests: Vec<TestKind> = if args.test == "all" {
        TestKind::EXHAUSTIVE.to_vec()
    } else {
        vec![TestKind::parse(&args.test).ok_or_else(|| Error::Config(format!("unknown test {:?}", args.test)))?]
    };
    let grid = args.grid.grid()?;
    let ds = load_dataset(&args.data.x, &args.data.source())?;
    let reports = evaluate_tests(&ds, &tests, &grid, args.alpha, args.grid.penalty(), args.k, args.seed)?;
    let text = match args.format {
        Format::Json => reports_to_json(&reports),
        Format::Csv => reports_to_csv(&reports),
    };
    print!("{text}");
    if let Some(path) = &args.output {
        write_out(path, &text)?;
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let cfg = read_sim_config(&args.config)?;
    let sweep = run_sweep(&cfg)?;
    fs::create_dir_all(&args.out_dir)?;
    write_out(&args.out_dir.join("replicates.csv"), &sweep.replicates_csv())?;
    let summary = sweep.summary_csv();
    write_out(&args.out_dir.join("summary.csv"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn cmd_kfold_instability(args: &InstabilityArgs) -> Result<(), Error> {
    check_alpha(args.alpha)?;
    if args.seeds == 0 {
        return Err(Error::Config("seeds must be at least 1".into()));
    }
    let grid = args.grid.grid()?;
    let ds = load_dataset(&args.data.x, &args.data.source())?;
    let mut csv = String::from("seed,statistic,p_value,reject\n");
    let mut rejections = 0u64;
    for s in 1..=args.seeds {
        let seed = KFOLD_BASE_SEED + s;
        let r = kfold_cv_test_with(&ds, args.k, seed, &grid, args.alpha, args.grid.penalty())?;
        rejections += u64::from(r.reject);
        csv.push_str(&format!("{seed},{},{},{}\n", csv_float(r.statistic), csv_float(r.p_value), r.reject));
    }
    let fraction = rejections as f64 / args.seeds as f64;
    match &args.output {
        Some(path) => write_out(path, &csv)?,
        None => print!("{csv}"),
    }
    eprintln!("rejection fraction: {fraction}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(2);
    }
    let outcome = match &cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::KfoldInstability(a) => cmd_kfold_instability(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
