//! The four experiment drivers and their CSV schemas.
//!
//! Every run owns a seed derived from `(seed, run index)`; runs execute on a
//! thread pool of `jobs` workers and rows are emitted in run order, so the
//! output does not depend on scheduling.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::active::{accuracy, run_active, ActiveConfig, ActiveRun, Pool, QueryRule, QueryScore};
use crate::centers::CenterMethod;
use crate::error::{Error, Result};
use crate::geometry::{estimate_volume, generalized_partition_check, random_polytope, random_unit, VerifyConfig};
use crate::harness::config::Config;
use crate::harness::synthetic::{generate_synthetic, SyntheticConfig};
use crate::harness::table::Table;
use crate::perceptron::{localize, perceptron_baseline, OracleStrategy, StrategyKind};
use crate::seed;
use crate::versionspace::io::load_sparse;
use crate::versionspace::{min_margin, Dataset, Label};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    StrategyComparison,
    MarginSweep,
    ActiveCurves,
    TheoremSweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::StrategyComparison => "strategy",
            ExperimentKind::MarginSweep => "margin",
            ExperimentKind::ActiveCurves => "active",
            ExperimentKind::TheoremSweep => "theorem",
        }
    }

    fn default_runs(self) -> usize {
        match self {
            ExperimentKind::StrategyComparison => 1000,
            ExperimentKind::MarginSweep => 100,
            ExperimentKind::ActiveCurves => 50,
            ExperimentKind::TheoremSweep => 20,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strategy" | "strategy-comparison" => Ok(ExperimentKind::StrategyComparison),
            "margin" | "margin-sweep" => Ok(ExperimentKind::MarginSweep),
            "active" | "active-curves" => Ok(ExperimentKind::ActiveCurves),
            "theorem" | "theorem-sweep" => Ok(ExperimentKind::TheoremSweep),
            other => Err(Error::InvalidConfig(format!("unknown experiment {other:?}"))),
        }
    }
}

/// Fully resolved experiment parameters. Every field maps to one config key
/// of the same name.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub runs: usize,
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub jobs: usize,
    pub output: Option<PathBuf>,
    // Localization.
    pub n_points: usize,
    pub side: f64,
    pub dim: usize,
    pub gamma: f64,
    pub gammas: Vec<f64>,
    pub strategies: Vec<StrategyKind>,
    pub update_budget: u64,
    // Active learning.
    pub pool_size: usize,
    pub test_size: usize,
    pub active_dim: usize,
    pub active_gamma: f64,
    pub budget: usize,
    pub methods: Vec<CenterMethod>,
    pub random_baseline: bool,
    pub query_score: QueryScore,
    pub centroid_samples: usize,
    /// Ball samples per round for the localizer volume; 0 disables it.
    pub volume_samples: usize,
    /// Sparse-format corpora used as pools instead of synthetic data.
    pub datasets: Vec<PathBuf>,
    // Theorem sweep.
    pub dims: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub verify_samples: usize,
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentSpec {
    pub fn new(experiment: ExperimentKind, seed: u64) -> Self {
        Self {
            experiment,
            runs: experiment.default_runs(),
            seed,
            jobs: 0,
            output: None,
            n_points: 1000,
            side: 20.0,
            dim: 2,
            gamma: 0.1,
            gammas: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.3],
            strategies: vec![StrategyKind::LargestError, StrategyKind::SmallestError, StrategyKind::RandomError],
            update_budget: crate::perceptron::default_update_budget(),
            pool_size: 400,
            test_size: 1000,
            active_dim: 5,
            active_gamma: 0.1,
            budget: 60,
            methods: vec![CenterMethod::Chebyshev, CenterMethod::CentroidMC],
            random_baseline: true,
            query_score: QueryScore::Absolute,
            centroid_samples: 1000,
            volume_samples: 0,
            datasets: Vec::new(),
            dims: vec![2, 3, 4],
            lambdas: vec![0.0, 0.1, 0.2, 0.5],
            verify_samples: 100_000,
        }
    }

    /// Reads every key from `cfg`, falling back to defaults. `experiment`
    /// must be present.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let kind: ExperimentKind = cfg
            .raw("experiment")
            .ok_or_else(|| Error::InvalidConfig("missing key experiment".into()))?
            .parse()?;
        let d = Self::new(kind, cfg.get("seed", 0u64)?);
        let spec = Self {
            experiment: kind,
            runs: cfg.get("runs", d.runs)?,
            seed: d.seed,
            jobs: cfg.get("jobs", d.jobs)?,
            output: cfg.raw("output").filter(|s| !s.is_empty()).map(PathBuf::from),
            n_points: cfg.get("n_points", d.n_points)?,
            side: cfg.get("side", d.side)?,
            dim: cfg.get("dim", d.dim)?,
            gamma: cfg.get("gamma", d.gamma)?,
            gammas: cfg.get_list("gammas", d.gammas)?,
            strategies: cfg.get_list("strategies", d.strategies)?,
            update_budget: cfg.get("update_budget", d.update_budget)?,
            pool_size: cfg.get("pool_size", d.pool_size)?,
            test_size: cfg.get("test_size", d.test_size)?,
            active_dim: cfg.get("active_dim", d.active_dim)?,
            active_gamma: cfg.get("active_gamma", d.active_gamma)?,
            budget: cfg.get("budget", d.budget)?,
            methods: cfg.get_list("methods", d.methods)?,
            random_baseline: cfg.get("random_baseline", d.random_baseline)?,
            query_score: cfg.get("query_score", d.query_score)?,
            centroid_samples: cfg.get("centroid_samples", d.centroid_samples)?,
            volume_samples: cfg.get("volume_samples", d.volume_samples)?,
            datasets: cfg.get_list("datasets", d.datasets)?,
            dims: cfg.get_list("dims", d.dims)?,
            lambdas: cfg.get_list("lambdas", d.lambdas)?,
            verify_samples: cfg.get("verify_samples", d.verify_samples)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.experiment == ExperimentKind::ActiveCurves && self.budget == 0 {
            return bad("budget must be at least 1");
        }
        if self.dims.iter().any(|&d| d < 2) {
            return bad("dims must be at least 2");
        }
        if self.lambdas.iter().any(|l| !(0.0..1.0).contains(l)) {
            return bad("lambdas must lie in [0, 1)");
        }
        Ok(())
    }

    /// Every key with its resolved value.
    pub fn to_config(&self) -> Config {
        let mut c = Config::new();
        c.set("experiment", self.experiment);
        c.set("runs", self.runs);
        c.set("seed", self.seed);
        c.set("jobs", self.jobs);
        if let Some(o) = &self.output {
            c.set("output", o.display());
        }
        c.set("n_points", self.n_points);
        c.set("side", self.side);
        c.set("dim", self.dim);
        c.set("gamma", self.gamma);
        c.set("gammas", join(&self.gammas));
        c.set("strategies", self.strategies.iter().map(|s| s.name()).collect::<Vec<_>>().join(","));
        c.set("update_budget", self.update_budget);
        c.set("pool_size", self.pool_size);
        c.set("test_size", self.test_size);
        c.set("active_dim", self.active_dim);
        c.set("active_gamma", self.active_gamma);
        c.set("budget", self.budget);
        c.set("methods", self.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","));
        c.set("random_baseline", self.random_baseline);
        c.set("query_score", self.query_score.name());
        c.set("centroid_samples", self.centroid_samples);
        c.set("volume_samples", self.volume_samples);
        c.set("datasets", self.datasets.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","));
        c.set("dims", join(&self.dims));
        c.set("lambdas", join(&self.lambdas));
        c.set("verify_samples", self.verify_samples);
        c
    }

    pub fn config_hash(&self) -> String {
        self.to_config().hash()
    }

    fn run_seed(&self, run: usize) -> u64 {
        seed::derive(self.seed, run as u64)
    }
}

/// Runs `f` for every index on a pool of `jobs` threads, keeping index order.
fn par_runs<T, F>(jobs: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Table> {
    spec.validate()?;
    match spec.experiment {
        ExperimentKind::StrategyComparison => run_strategy_comparison(spec),
        ExperimentKind::MarginSweep => run_margin_sweep(spec),
        ExperimentKind::ActiveCurves => run_active_curves(spec),
        ExperimentKind::TheoremSweep => run_theorem_sweep(spec),
    }
}

fn f(x: f64) -> String {
    x.to_string()
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn strategy_for(kind: StrategyKind, run_seed: u64) -> OracleStrategy {
    match kind {
        StrategyKind::LargestError => OracleStrategy::largest_error(),
        StrategyKind::SmallestError => OracleStrategy::smallest_error(),
        StrategyKind::RandomError => OracleStrategy::random_error(seed::derive(run_seed, 1)),
    }
}

/// Outcome of one localizer on one dataset.
#[derive(Clone, Debug)]
struct LocalizeRow {
    name: &'static str,
    planes: Option<usize>,
    total_updates: u64,
    updates_per_round: Vec<u64>,
}

#[derive(Clone, Debug)]
struct DataRun {
    run: usize,
    run_seed: u64,
    gamma: f64,
    n_points: usize,
    gamma_prime: f64,
    results: Vec<LocalizeRow>,
}

impl DataRun {
    /// Novikoff bound `ceil(1/γ'²)` on the total number of updates.
    fn mistake_bound(&self) -> f64 {
        (1.0 / (self.gamma_prime * self.gamma_prime)).ceil()
    }
}

fn localize_run(spec: &ExperimentSpec, run: usize, gamma: f64, data_seed: u64, baseline: bool) -> Result<DataRun> {
    let cfg = SyntheticConfig { n_points: spec.n_points, side: spec.side, dim: spec.dim, ..SyntheticConfig::new(gamma, data_seed) };
    let (data, w_star) = generate_synthetic(&cfg)?;
    let (gamma_prime, _) = min_margin(&w_star, &data)?;
    let run_seed = spec.run_seed(run);
    let mut results = Vec::new();
    for &k in &spec.strategies {
        let t = localize(&data, strategy_for(k, run_seed), spec.update_budget)?;
        results.push(LocalizeRow {
            name: k.name(),
            planes: Some(t.num_planes()),
            total_updates: t.total_updates,
            updates_per_round: t.updates_per_round,
        });
    }
    if baseline {
        let (_, updates) = perceptron_baseline(&data, spec.update_budget)?;
        results.push(LocalizeRow { name: "perceptron", planes: None, total_updates: updates, updates_per_round: Vec::new() });
    }
    Ok(DataRun { run, run_seed, gamma, n_points: data.len(), gamma_prime, results })
}

fn push_run_rows(t: &mut Table, spec: &ExperimentSpec, hash: &str, r: &DataRun) {
    let bound = r.mistake_bound();
    for row in &r.results {
        let per_round = row.updates_per_round.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(";");
        t.push(&[
            ("record", "run".into()),
            ("seed", spec.seed.to_string()),
            ("config_hash", hash.into()),
            ("run", r.run.to_string()),
            ("run_seed", r.run_seed.to_string()),
            ("strategy", row.name.into()),
            ("gamma", f(r.gamma)),
            ("n_points", r.n_points.to_string()),
            ("planes", row.planes.map(|p| p.to_string()).unwrap_or_default()),
            ("total_updates", row.total_updates.to_string()),
            ("updates_per_round", per_round),
            ("gamma_prime", f(r.gamma_prime)),
            ("mistake_bound", f(bound)),
            ("within_bound", (row.total_updates as f64 <= bound).to_string()),
        ]);
    }
}

pub const STRATEGY_COLUMNS: &[&str] = &[
    "record", "seed", "config_hash", "run", "run_seed", "strategy", "gamma", "n_points", "planes", "total_updates",
    "updates_per_round", "gamma_prime", "mistake_bound", "within_bound", "planes_at_least", "probability",
    "mean_planes", "mean_updates", "updates_per_plane", "frac_planes_le4", "frac_planes_le6",
];

/// Plane counts and update counts of every strategy at one margin.
pub fn run_strategy_comparison(spec: &ExperimentSpec) -> Result<Table> {
    let hash = spec.config_hash();
    let runs = par_runs(spec.jobs, spec.runs, |i| localize_run(spec, i, spec.gamma, spec.run_seed(i), false))?;
    let mut t = Table::new(STRATEGY_COLUMNS);
    for r in &runs {
        push_run_rows(&mut t, spec, &hash, r);
    }
    for (si, kind) in spec.strategies.iter().enumerate() {
        let planes: Vec<usize> = runs.iter().map(|r| r.results[si].planes.unwrap_or(0)).collect();
        let max = planes.iter().copied().max().unwrap_or(0);
        for i in 1..=max {
            let p = planes.iter().filter(|&&k| k >= i).count() as f64 / planes.len() as f64;
            t.push(&[
                ("record", "distribution".into()),
                ("seed", spec.seed.to_string()),
                ("config_hash", hash.clone()),
                ("strategy", kind.name().into()),
                ("gamma", f(spec.gamma)),
                ("planes_at_least", i.to_string()),
                ("probability", f(p)),
            ]);
        }
        let updates: Vec<f64> = runs.iter().map(|r| r.results[si].total_updates as f64).collect();
        let total_planes: usize = planes.iter().sum();
        let frac = |k: usize| planes.iter().filter(|&&p| p <= k).count() as f64 / planes.len() as f64;
        t.push(&[
            ("record", "summary".into()),
            ("seed", spec.seed.to_string()),
            ("config_hash", hash.clone()),
            ("strategy", kind.name().into()),
            ("gamma", f(spec.gamma)),
            ("mean_planes", f(mean(planes.iter().map(|&p| p as f64)))),
            ("mean_updates", f(mean(updates.iter().copied()))),
            ("updates_per_plane", f(updates.iter().sum::<f64>() / total_planes as f64)),
            ("frac_planes_le4", f(frac(4))),
            ("frac_planes_le6", f(frac(6))),
        ]);
    }
    Ok(t)
}

pub const MARGIN_COLUMNS: &[&str] = &[
    "record", "seed", "config_hash", "run", "run_seed", "strategy", "gamma", "n_points", "planes", "total_updates",
    "updates_per_round", "gamma_prime", "mistake_bound", "within_bound", "mean_planes", "mean_updates",
    "spearman_rho",
];

/// Ranks with ties sharing their average rank.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, my) = (mean(rx.iter().copied()), mean(ry.iter().copied()));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Plane and update counts over a grid of margins, with the plain
/// Perceptron on the full dataset as a baseline.
pub fn run_margin_sweep(spec: &ExperimentSpec) -> Result<Table> {
    let hash = spec.config_hash();
    let jobs: Vec<(usize, usize)> = (0..spec.gammas.len()).flat_map(|g| (0..spec.runs).map(move |r| (g, r))).collect();
    let runs = par_runs(spec.jobs, jobs.len(), |i| {
        let (g, r) = jobs[i];
        localize_run(spec, r, spec.gammas[g], seed::derive(spec.run_seed(r), g as u64), true)
    })?;
    let mut t = Table::new(MARGIN_COLUMNS);
    for r in &runs {
        push_run_rows(&mut t, spec, &hash, r);
    }
    let names: Vec<&'static str> = runs.first().map(|r| r.results.iter().map(|x| x.name).collect()).unwrap_or_default();
    for (g, &gamma) in spec.gammas.iter().enumerate() {
        let at: Vec<&DataRun> = runs[g * spec.runs..(g + 1) * spec.runs].iter().collect();
        for (si, name) in names.iter().enumerate() {
            let planes = at[0].results[si].planes.map(|_| f(mean(at.iter().map(|r| r.results[si].planes.unwrap_or(0) as f64))));
            t.push(&[
                ("record", "summary".into()),
                ("seed", spec.seed.to_string()),
                ("config_hash", hash.clone()),
                ("strategy", (*name).into()),
                ("gamma", f(gamma)),
                ("mean_planes", planes.unwrap_or_default()),
                ("mean_updates", f(mean(at.iter().map(|r| r.results[si].total_updates as f64)))),
            ]);
        }
    }
    for (si, name) in names.iter().enumerate() {
        if runs[0].results[si].planes.is_none() {
            continue;
        }
        let gs: Vec<f64> = runs.iter().map(|r| r.gamma).collect();
        let ps: Vec<f64> = runs.iter().map(|r| r.results[si].planes.unwrap_or(0) as f64).collect();
        t.push(&[
            ("record", "trend".into()),
            ("seed", spec.seed.to_string()),
            ("config_hash", hash.clone()),
            ("strategy", (*name).into()),
            ("spearman_rho", f(spearman(&gs, &ps))),
        ]);
    }
    Ok(t)
}

pub const ACTIVE_COLUMNS: &[&str] = &[
    "record", "seed", "config_hash", "run", "run_seed", "source", "method", "query_score", "queries", "index",
    "label", "violated", "accuracy", "volume", "volume_stderr", "message",
];

/// Pool, held-out test set and label lookup for one active run.
struct ActiveData {
    source: String,
    pool: Dataset,
    test: Dataset,
}

fn synthetic_pool(spec: &ExperimentSpec, run_seed: u64) -> Result<ActiveData> {
    let cfg = SyntheticConfig {
        n_points: spec.pool_size + spec.test_size,
        side: spec.side,
        dim: spec.active_dim,
        reflect: false,
        ..SyntheticConfig::new(spec.active_gamma, run_seed)
    };
    let (data, _) = generate_synthetic(&cfg)?;
    let n_pool = spec.pool_size.min(data.len() / 2).max(1);
    let pool_idx: Vec<usize> = (0..n_pool).collect();
    let test_idx: Vec<usize> = (n_pool..data.len()).collect();
    Ok(ActiveData { source: "synthetic".into(), pool: data.select(&pool_idx)?, test: data.select(&test_idx)? })
}

fn corpus_pool(spec: &ExperimentSpec, data: &Dataset, name: &str, run_seed: u64) -> Result<ActiveData> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut seed::rng(run_seed));
    let n_pool = spec.pool_size.min(data.len() / 2).max(1);
    Ok(ActiveData { source: name.into(), pool: data.select(&idx[..n_pool])?, test: data.select(&idx[n_pool..])? })
}

/// First point of each class in pool order.
pub fn initial_labels(pool: &Dataset) -> Vec<(usize, Label)> {
    let mut init = Vec::new();
    for y in [Label::Pos, Label::Neg] {
        if let Some(i) = pool.points().iter().position(|p| p.y() == y) {
            init.push((i, y));
        }
    }
    init.sort_unstable_by_key(|&(i, _)| i);
    init
}

struct Curve {
    name: &'static str,
    run: ActiveRun,
    accuracy: Vec<f64>,
    volumes: Vec<Option<(f64, f64)>>,
}

fn active_run(spec: &ExperimentSpec, data: &ActiveData, run_seed: u64) -> Result<Vec<Curve>> {
    let pool = Pool::from_dataset(&data.pool);
    let init = initial_labels(&data.pool);
    let dim = pool.dim();
    let mut arms: Vec<(&'static str, CenterMethod, QueryRule)> =
        spec.methods.iter().map(|&m| (m.name(), m, QueryRule::Center(spec.query_score))).collect();
    if spec.random_baseline {
        arms.push(("random", CenterMethod::CentroidMC, QueryRule::Random { seed: seed::derive(run_seed, 3) }));
    }
    let mut curves = Vec::new();
    for (name, method, rule) in arms {
        let mut cfg = ActiveConfig::new(method, spec.budget, dim, seed::derive(run_seed, 2));
        cfg.rule = rule;
        cfg.centroid_samples = spec.centroid_samples;
        let mut oracle = |i: usize| data.pool.point(i).y();
        let run = run_active(&pool, &mut oracle, &init, &cfg)?;
        let accuracy = run.centers.iter().map(|c| accuracy(&c.point, &data.test)).collect();
        let mut volumes = Vec::new();
        if spec.volume_samples > 0 {
            let vseed = seed::derive(run_seed, 4);
            for k in 0..run.centers.len() {
                volumes.push(match estimate_volume(&run.polytope_at(k), spec.volume_samples, vseed) {
                    Ok(v) => Some((v.value, v.stderr)),
                    Err(Error::ZeroAcceptance { .. }) => Some((0.0, 0.0)),
                    Err(e) => return Err(e),
                });
            }
        }
        curves.push(Curve { name, run, accuracy, volumes });
    }
    Ok(curves)
}

/// Test accuracy against the number of purchased labels for Active-SVM,
/// Active-BPM and a random-query baseline.
pub fn run_active_curves(spec: &ExperimentSpec) -> Result<Table> {
    let hash = spec.config_hash();
    let mut t = Table::new(ACTIVE_COLUMNS);
    let mut corpora = Vec::new();
    for path in &spec.datasets {
        match load_sparse(path, None) {
            Ok(d) => corpora.push((path.display().to_string(), d)),
            Err(Error::DatasetUnavailable(p)) => t.push(&[
                ("record", "warning".into()),
                ("seed", spec.seed.to_string()),
                ("config_hash", hash.clone()),
                ("source", p.display().to_string()),
                ("message", "dataset unavailable, using synthetic pool".into()),
            ]),
            Err(e) => return Err(e),
        }
    }
    let sources: Vec<Option<usize>> = if corpora.is_empty() { vec![None] } else { (0..corpora.len()).map(Some).collect() };
    for src in sources {
        let results = par_runs(spec.jobs, spec.runs, |i| {
            let rs = spec.run_seed(i);
            let data = match src {
                None => synthetic_pool(spec, rs)?,
                Some(c) => corpus_pool(spec, &corpora[c].1, &corpora[c].0, rs)?,
            };
            Ok((data.source.clone(), active_run(spec, &data, rs)?))
        })?;
        let common = |rec: &str| {
            vec![("record", rec.to_string()), ("seed", spec.seed.to_string()), ("config_hash", hash.clone())]
        };
        for (run, (source, curves)) in results.iter().enumerate() {
            for c in curves {
                for (k, acc) in c.accuracy.iter().enumerate() {
                    let mut row = common("curve");
                    row.extend([
                        ("run", run.to_string()),
                        ("run_seed", spec.run_seed(run).to_string()),
                        ("source", source.clone()),
                        ("method", c.name.to_string()),
                        ("query_score", spec.query_score.name().to_string()),
                        ("queries", k.to_string()),
                        ("accuracy", f(*acc)),
                    ]);
                    if let Some(q) = k.checked_sub(1).map(|q| c.run.queried[q]) {
                        row.extend([
                            ("index", q.index.to_string()),
                            ("label", q.label.as_i8().to_string()),
                            ("violated", q.was_violated.to_string()),
                        ]);
                    }
                    if let Some(Some((v, se))) = c.volumes.get(k) {
                        row.extend([("volume", f(*v)), ("volume_stderr", f(*se))]);
                    }
                    t.push(&row);
                }
            }
        }
        let Some((source, first)) = results.first() else { continue };
        for (ci, c) in first.iter().enumerate() {
            let len = results.iter().map(|(_, cs)| cs[ci].accuracy.len()).max().unwrap_or(0);
            for k in 0..len {
                let m = mean(results.iter().filter_map(|(_, cs)| cs[ci].accuracy.get(k).copied()));
                let mut row = common("mean");
                row.extend([
                    ("source", source.clone()),
                    ("method", c.name.to_string()),
                    ("query_score", spec.query_score.name().to_string()),
                    ("queries", k.to_string()),
                    ("accuracy", f(m)),
                ]);
                t.push(&row);
            }
        }
    }
    Ok(t)
}

pub const THEOREM_COLUMNS: &[&str] = &[
    "record", "seed", "config_hash", "run", "body_seed", "body", "d", "lambda", "offset", "ratio", "ratio_minus",
    "stderr", "bound", "vol_total", "vol_total_stderr", "precondition", "satisfied",
];

/// Seed of random body `run` in dimension `d`.
pub fn body_seed(root: u64, d: usize, run: usize) -> u64 {
    seed::derive(seed::derive(root, d as u64), run as u64)
}

/// Random polytope, cut normal and verifier config of one sweep instance.
pub fn theorem_instance(spec: &ExperimentSpec, d: usize, run: usize) -> (crate::versionspace::SphericalPolytope, Vec<f64>, VerifyConfig) {
    let bs = body_seed(spec.seed, d, run);
    let body = random_polytope(d, bs);
    let normal = random_unit(d, &mut seed::rng(seed::derive(bs, 1)));
    (body, normal, VerifyConfig::new(spec.verify_samples, seed::derive(bs, 2)))
}

/// Partition ratios of random polytopes cut through (or offset from) their
/// centroid.
pub fn run_theorem_sweep(spec: &ExperimentSpec) -> Result<Table> {
    let hash = spec.config_hash();
    let mut t = Table::new(THEOREM_COLUMNS);
    if spec.dims.is_empty() || spec.lambdas.is_empty() {
        return Ok(t);
    }
    let jobs: Vec<(usize, usize, usize)> = spec
        .dims
        .iter()
        .flat_map(|&d| (0..spec.runs).flat_map(move |r| (0..spec.lambdas.len()).map(move |l| (d, r, l))))
        .collect();
    let reports = par_runs(spec.jobs, jobs.len(), |i| {
        let (d, run, l) = jobs[i];
        let (body, normal, cfg) = theorem_instance(spec, d, run);
        match generalized_partition_check(&format!("d{d}-r{run}"), &body, &normal, spec.lambdas[l], &cfg) {
            Ok(r) => Ok(Some(r)),
            Err(Error::OffsetOutsideBody) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    for (&(d, run, l), rep) in jobs.iter().zip(&reports) {
        let mut row = vec![
            ("record", "partition".to_string()),
            ("seed", spec.seed.to_string()),
            ("config_hash", hash.clone()),
            ("run", run.to_string()),
            ("body_seed", body_seed(spec.seed, d, run).to_string()),
            ("body", format!("d{d}-r{run}")),
            ("d", d.to_string()),
            ("lambda", f(spec.lambdas[l])),
            ("precondition", rep.is_some().to_string()),
        ];
        if let Some(r) = rep {
            row.extend([
                ("offset", f(r.offset)),
                ("ratio", f(r.ratio)),
                ("ratio_minus", f(r.ratio_minus)),
                ("stderr", f(r.ratio_stderr)),
                ("bound", f(r.bound)),
                ("vol_total", f(r.vol_total.value)),
                ("vol_total_stderr", f(r.vol_total.stderr)),
                ("satisfied", r.satisfied.to_string()),
            ]);
        }
        t.push(&row);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentSpec {
        ExperimentSpec { runs: 3, jobs: 2, ..ExperimentSpec::new(kind, 11) }
    }

    #[test]
    fn spec_round_trips_through_config() {
        let mut spec = small(ExperimentKind::MarginSweep);
        spec.gammas = vec![0.05, 0.3];
        spec.methods = vec![CenterMethod::CentroidMC];
        let back = ExperimentSpec::from_config(&spec.to_config()).unwrap();
        assert_eq!(back, spec);
        let other = ExperimentSpec { jobs: 7, output: Some("x.csv".into()), ..spec.clone() };
        assert_eq!(other.config_hash(), spec.config_hash());
        let changed = ExperimentSpec { seed: 12, ..spec.clone() };
        assert_ne!(changed.config_hash(), spec.config_hash());
    }

    #[test]
    fn spec_validation() {
        let mut c = Config::parse("experiment = theorem\nruns = 0\n").unwrap();
        assert!(ExperimentSpec::from_config(&c).is_err());
        c.set("runs", 2);
        c.set("lambdas", "0.1, 1.0");
        assert!(ExperimentSpec::from_config(&c).is_err());
        assert!(ExperimentSpec::from_config(&Config::parse("runs = 2").unwrap()).is_err());
    }

    #[test]
    fn spearman_cases() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[1.0, 5.0, 9.0]) - 1.0).abs() < 1e-12);
        assert_eq!(ranks(&[2.0, 1.0, 2.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn strategy_rows_and_distribution() {
        let t = run_strategy_comparison(&small(ExperimentKind::StrategyComparison)).unwrap();
        assert_eq!(t.records("run").count(), 9);
        assert_eq!(t.records("summary").count(), 3);
        for r in t.records("distribution") {
            if t.cell::<usize>(r, "planes_at_least") == Some(1) {
                assert_eq!(t.cell::<f64>(r, "probability"), Some(1.0));
            }
        }
        let hash = small(ExperimentKind::StrategyComparison).config_hash();
        assert!(t.rows().iter().all(|r| r[t.index("config_hash").unwrap()] == hash && r[1] == "11"));
    }

    #[test]
    fn margin_sweep_includes_baseline_and_trend() {
        let spec = ExperimentSpec { gammas: vec![0.05, 0.3], ..small(ExperimentKind::MarginSweep) };
        let t = run_margin_sweep(&spec).unwrap();
        assert_eq!(t.records("run").count(), 2 * 3 * 4);
        assert!(t.records("run").all(|r| t.cell::<bool>(r, "within_bound") == Some(true)));
        assert_eq!(t.records("trend").count(), 3);
    }

    #[test]
    fn theorem_sweep_empty_grid_is_header_only() {
        let spec = ExperimentSpec { dims: vec![], ..small(ExperimentKind::TheoremSweep) };
        let csv = run_theorem_sweep(&spec).unwrap().to_csv().unwrap();
        assert_eq!(csv.lines().count(), 1);
    }

    #[test]
    fn active_accounting_and_missing_corpus() {
        let spec = ExperimentSpec {
            runs: 2,
            budget: 5,
            pool_size: 60,
            test_size: 60,
            centroid_samples: 200,
            datasets: vec!["/nonexistent/corpus.svm".into()],
            ..small(ExperimentKind::ActiveCurves)
        };
        let t = run_active_curves(&spec).unwrap();
        assert_eq!(t.records("warning").count(), 1);
        assert_eq!(t.records("curve").count(), 2 * 3 * 6);
        assert_eq!(t.records("mean").count(), 3 * 6);
    }

    #[test]
    fn initial_labels_first_per_class() {
        let d = Dataset::from_rows(vec![(vec![1.0], 1), (vec![2.0], 1), (vec![-1.0], -1)]).unwrap();
        assert_eq!(initial_labels(&d), vec![(0, Label::Pos), (2, Label::Neg)]);
    }
}
