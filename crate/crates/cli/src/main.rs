//! `cutplane` command-line interface.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cutplane::compression::{generalization_report, replay, train_errors, CompressionScheme};
use cutplane::harness::{run_experiment, Config, ExperimentSpec};
use cutplane::perceptron::{localize, OracleStrategy, StrategyKind};
use cutplane::versionspace::io::{load_dense_csv, load_sparse};
use cutplane::{Dataset, Error, Result};

#[derive(Parser)]
#[command(name = "cutplane", version, about = "Cutting-plane localization in version space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Localize a consistent classifier for a dataset file and print its compression scheme.
    Localize(LocalizeArgs),
    /// Accuracy-versus-queries curves for Active-SVM, Active-BPM and random queries.
    Active(ExperimentArgs),
    /// Centroid and offset partition checks on random polytopes.
    Verify(ExperimentArgs),
    /// Strategy comparison or margin sweep.
    Sweep {
        #[arg(long, value_enum)]
        kind: SweepKind,
        #[command(flatten)]
        args: ExperimentArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Strategy,
    Margin,
}

#[derive(Args)]
struct LocalizeArgs {
    /// Flat key=value file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset path.
    #[arg(long)]
    data: Option<String>,
    /// `dense` (CSV, label last) or `sparse` (label index:value ...).
    #[arg(long)]
    format: Option<String>,
    /// Feature dimension for sparse input.
    #[arg(long)]
    dim: Option<String>,
    /// largest-error, smallest-error or random-error.
    #[arg(long)]
    strategy: Option<String>,
    /// Seed of the random-error oracle.
    #[arg(long = "strategy_seed")]
    strategy_seed: Option<String>,
    #[arg(long = "update_budget")]
    update_budget: Option<String>,
    /// Where to write the compression scheme (stdout when absent).
    #[arg(long)]
    scheme: Option<String>,
    /// Replay this scheme against the dataset instead of localizing.
    #[arg(long)]
    replay: Option<String>,
}

/// Every experiment key, each overriding the config file.
#[derive(Args)]
struct ExperimentArgs {
    /// Flat key=value file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed.
    #[arg(long, required = true)]
    seed: String,
    #[arg(long)]
    runs: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<String>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    output: Option<String>,
    #[arg(long = "n_points")]
    n_points: Option<String>,
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    gammas: Option<String>,
    #[arg(long)]
    strategies: Option<String>,
    #[arg(long = "update_budget")]
    update_budget: Option<String>,
    #[arg(long = "pool_size")]
    pool_size: Option<String>,
    #[arg(long = "test_size")]
    test_size: Option<String>,
    #[arg(long = "active_dim")]
    active_dim: Option<String>,
    #[arg(long = "active_gamma")]
    active_gamma: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    methods: Option<String>,
    #[arg(long = "random_baseline")]
    random_baseline: Option<String>,
    #[arg(long = "query_score")]
    query_score: Option<String>,
    #[arg(long = "centroid_samples")]
    centroid_samples: Option<String>,
    #[arg(long = "volume_samples")]
    volume_samples: Option<String>,
    #[arg(long)]
    datasets: Option<String>,
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    lambdas: Option<String>,
    #[arg(long = "verify_samples")]
    verify_samples: Option<String>,
}

impl ExperimentArgs {
    fn overrides(&self) -> Vec<(&'static str, Option<&String>)> {
        vec![
            ("seed", Some(&self.seed)),
            ("runs", self.runs.as_ref()),
            ("jobs", self.jobs.as_ref()),
            ("output", self.output.as_ref()),
            ("n_points", self.n_points.as_ref()),
            ("side", self.side.as_ref()),
            ("dim", self.dim.as_ref()),
            ("gamma", self.gamma.as_ref()),
            ("gammas", self.gammas.as_ref()),
            ("strategies", self.strategies.as_ref()),
            ("update_budget", self.update_budget.as_ref()),
            ("pool_size", self.pool_size.as_ref()),
            ("test_size", self.test_size.as_ref()),
            ("active_dim", self.active_dim.as_ref()),
            ("active_gamma", self.active_gamma.as_ref()),
            ("budget", self.budget.as_ref()),
            ("methods", self.methods.as_ref()),
            ("random_baseline", self.random_baseline.as_ref()),
            ("query_score", self.query_score.as_ref()),
            ("centroid_samples", self.centroid_samples.as_ref()),
            ("volume_samples", self.volume_samples.as_ref()),
            ("datasets", self.datasets.as_ref()),
            ("dims", self.dims.as_ref()),
            ("lambdas", self.lambdas.as_ref()),
            ("verify_samples", self.verify_samples.as_ref()),
        ]
    }
}

fn load_config(path: Option<&PathBuf>, overrides: &[(&str, Option<&String>)]) -> Result<Config> {
    let mut cfg = match path {
        Some(p) => Config::load(p)?,
        None => Config::new(),
    };
    for (k, v) in overrides {
        if let Some(v) = v {
            cfg.set(k, v);
        }
    }
    Ok(cfg)
}

fn open_output(path: Option<&str>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn experiment(kind: &str, args: &ExperimentArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_ref(), &args.overrides())?;
    cfg.set("experiment", kind);
    let spec = ExperimentSpec::from_config(&cfg)?;
    let table = run_experiment(&spec)?;
    let out = open_output(spec.output.as_deref().and_then(|p| p.to_str()))?;
    table.write(out)
}

fn load_data(cfg: &Config) -> Result<Dataset> {
    let path: PathBuf = cfg
        .raw("data")
        .ok_or_else(|| Error::InvalidConfig("missing key data".into()))?
        .into();
    let dim = match cfg.raw("dim") {
        Some(_) => Some(cfg.get("dim", 0usize)?),
        None => None,
    };
    match cfg.get("format", String::from("dense"))?.as_str() {
        "dense" | "csv" => load_dense_csv(&path),
        "sparse" | "svmlight" => load_sparse(&path, dim),
        other => Err(Error::InvalidConfig(format!("unknown format {other:?}"))),
    }
}

fn run_localize(args: &LocalizeArgs) -> Result<()> {
    let cfg = load_config(
        args.config.as_ref(),
        &[
            ("data", args.data.as_ref()),
            ("format", args.format.as_ref()),
            ("dim", args.dim.as_ref()),
            ("strategy", args.strategy.as_ref()),
            ("strategy_seed", args.strategy_seed.as_ref()),
            ("update_budget", args.update_budget.as_ref()),
            ("scheme", args.scheme.as_ref()),
            ("replay", args.replay.as_ref()),
        ],
    )?;
    let data = load_data(&cfg)?;
    let budget = cfg.get("update_budget", cutplane::perceptron::default_update_budget())?;
    let mut out = io::stdout().lock();
    if let Some(path) = cfg.raw("replay") {
        let scheme: CompressionScheme = std::fs::read_to_string(path)?.parse()?;
        let w = replay(&data, &scheme)?;
        let same = w.iter().map(|v| v.to_bits()).eq(scheme.predictor.iter().map(|v| v.to_bits()));
        writeln!(out, "replay_matches {same}")?;
        writeln!(out, "w {}", w.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" "))?;
        return if same { Ok(()) } else { Err(Error::InvalidConfig("replayed predictor differs".into())) };
    }
    let kind: StrategyKind = cfg.get("strategy", StrategyKind::LargestError)?;
    let strategy = OracleStrategy { kind, seed: cfg.get("strategy_seed", 0u64)? };
    let trace = localize(&data, strategy, budget)?;
    let scheme = CompressionScheme::from_trace(&trace, strategy);
    let errors = train_errors(&data, &trace.w_final);
    writeln!(out, "points {}", data.len())?;
    writeln!(out, "planes {}", trace.num_planes())?;
    writeln!(out, "total_updates {}", trace.total_updates)?;
    writeln!(out, "train_errors {errors}")?;
    if let Ok(b) = generalization_report(data.len(), scheme.indices.len(), errors) {
        writeln!(out, "indicative_bound {b}")?;
    }
    match cfg.raw("scheme") {
        Some(p) => std::fs::write(p, scheme.to_text())?,
        None => out.write_all(scheme.to_text().as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Localize(a) => run_localize(a),
        Command::Active(a) => experiment("active", a),
        Command::Verify(a) => experiment("theorem", a),
        Command::Sweep { kind, args } => experiment(
            match kind {
                SweepKind::Strategy => "strategy",
                SweepKind::Margin => "margin",
            },
            args,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
