//! Pool-based active learning driven by cutting planes.
//!
//! Each round computes a center of the current localizer, asks for the label
//! of the pool point whose hyperplane passes closest to it, and cuts the
//! localizer only when the purchased label disagrees with the center.
//! With [`CenterMethod::Chebyshev`] this is Active-SVM, with
//! [`CenterMethod::CentroidMC`] Active-BPM.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rand::Rng;

use crate::centers::{centroid_estimate, chebyshev_center, CenterEstimate, CenterMethod, SamplerConfig};
use crate::error::{Error, Result};
use crate::geometry::{estimate_volume, VolumeEstimate};
use crate::linalg::{dot, is_zero, lex_cmp, norm};
use crate::seed;
use crate::versionspace::{Dataset, Halfspace, Label, LabeledPoint, SphericalPolytope};

/// Unlabeled pool of nonzero points sharing one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Pool {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl Pool {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyDataset)?.len();
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if is_zero(p) {
                return Err(Error::ZeroVector);
            }
        }
        Ok(Self { points, dim })
    }

    /// Drops the labels.
    pub fn from_dataset(d: &Dataset) -> Self {
        Self { points: d.points().iter().map(|p| p.x().to_vec()).collect(), dim: d.dim() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }
}

/// Supplies labels for pool indices. Must answer the same index consistently.
pub trait LabelOracle {
    fn label(&mut self, index: usize) -> Label;
}

impl<F: FnMut(usize) -> Label> LabelOracle for F {
    fn label(&mut self, index: usize) -> Label {
        self(index)
    }
}

/// How the query score treats the sign of `⟨center, x⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryScore {
    /// `|⟨c, x⟩| / ‖x‖`: distance of the point's hyperplane to the center.
    Absolute,
    /// `⟨c, x⟩ / ‖x‖`, the literal argmin.
    Signed,
}

impl QueryScore {
    pub fn name(self) -> &'static str {
        match self {
            QueryScore::Absolute => "abs",
            QueryScore::Signed => "signed",
        }
    }
}

impl std::str::FromStr for QueryScore {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "abs" | "absolute" => Ok(QueryScore::Absolute),
            "signed" => Ok(QueryScore::Signed),
            other => Err(Error::InvalidConfig(format!("unknown query score {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryRule {
    /// Pick the unqueried point closest to the center.
    Center(QueryScore),
    /// Uniformly random unqueried point; the baseline.
    Random { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct ActiveConfig {
    pub method: CenterMethod,
    pub rule: QueryRule,
    /// Labels to purchase.
    pub budget: usize,
    pub sampler: SamplerConfig,
    /// Hit-and-run samples per centroid estimate.
    pub centroid_samples: usize,
    pub chebyshev_tol: f64,
    pub chebyshev_max_iter: usize,
    /// Optional early stop once the localizer volume drops below a threshold.
    pub volume_stop: Option<VolumeStop>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeStop {
    pub threshold: f64,
    pub samples: usize,
    pub seed: u64,
}

impl ActiveConfig {
    pub fn new(method: CenterMethod, budget: usize, dim: usize, seed: u64) -> Self {
        Self {
            method,
            rule: QueryRule::Center(QueryScore::Absolute),
            budget,
            sampler: SamplerConfig::for_dim(dim, seed),
            centroid_samples: 1000,
            chebyshev_tol: 1e-10,
            chebyshev_max_iter: 10_000,
            volume_stop: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryRecord {
    pub index: usize,
    pub label: Label,
    pub was_violated: bool,
}

#[derive(Clone, Debug)]
pub struct ActiveRun {
    pub center_method: CenterMethod,
    pub rule: QueryRule,
    pub init: Vec<(usize, Label)>,
    pub queried: Vec<QueryRecord>,
    /// `centers[k]` is the center after `k` purchased labels.
    pub centers: Vec<CenterEstimate>,
    pub polytope: SphericalPolytope,
    pub budget: usize,
}

impl ActiveRun {
    /// Localizer after `k` purchased labels.
    pub fn polytope_at(&self, k: usize) -> SphericalPolytope {
        let cuts = |q: &[QueryRecord]| q.iter().filter(|r| r.was_violated).count();
        let n_init = self.polytope.len() - cuts(&self.queried);
        let keep = n_init + cuts(&self.queried[..k.min(self.queried.len())]);
        SphericalPolytope::with_halfspaces(self.polytope.dim(), self.polytope.halfspaces()[..keep].to_vec())
            .expect("prefix of a valid polytope")
    }

    /// Tab-separated records, one per round, with a header line. Round 0 is
    /// the initial state. `volumes`, when given, must have one entry per round.
    pub fn to_records(&self, volumes: Option<&[Option<VolumeEstimate>]>) -> String {
        let mut s = String::from("round\tindex\tlabel\tviolated\tcenter\tvolume\n");
        for (k, c) in self.centers.iter().enumerate() {
            let (idx, lab, vio) = match k.checked_sub(1).map(|q| self.queried[q]) {
                Some(q) => (q.index.to_string(), q.label.as_i8().to_string(), q.was_violated.to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            let center = c.point.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(";");
            let vol = volumes
                .and_then(|v| v.get(k).copied().flatten())
                .map(|v| format!("{:?}", v.value))
                .unwrap_or_default();
            writeln!(s, "{k}\t{idx}\t{lab}\t{vio}\t{center}\t{vol}").unwrap();
        }
        s
    }
}

fn score(center: &[f64], x: &[f64], kind: QueryScore) -> f64 {
    let v = dot(center, x) / norm(x);
    match kind {
        QueryScore::Absolute => v.abs(),
        QueryScore::Signed => v,
    }
}

/// Unqueried pool index whose hyperplane lies closest to the center.
pub fn select_query(center: &CenterEstimate, pool: &Pool, already_queried: &[bool], kind: QueryScore) -> Result<usize> {
    if center.point.len() != pool.dim() {
        return Err(Error::DimensionMismatch { expected: pool.dim(), found: center.point.len() });
    }
    if is_zero(&center.point) {
        return Err(Error::ZeroCenter);
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, x) in pool.points.iter().enumerate() {
        if already_queried.get(i).copied().unwrap_or(false) {
            continue;
        }
        let s = score(&center.point, x, kind);
        let better = match best {
            None => true,
            Some((j, sj)) => match s.total_cmp(&sj) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => lex_cmp(x, pool.point(j)) == Ordering::Less,
            },
        };
        if better {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i).ok_or(Error::PoolExhausted)
}

fn random_query(pool: &Pool, already_queried: &[bool], seed: u64) -> Result<usize> {
    let free: Vec<usize> = (0..pool.len()).filter(|&i| !already_queried[i]).collect();
    if free.is_empty() {
        return Err(Error::PoolExhausted);
    }
    Ok(free[seed::rng(seed).random_range(0..free.len())])
}

fn compute_center(polytope: &SphericalPolytope, cfg: &ActiveConfig) -> Result<CenterEstimate> {
    match cfg.method {
        CenterMethod::Chebyshev => chebyshev_center(polytope, cfg.chebyshev_tol, cfg.chebyshev_max_iter),
        CenterMethod::CentroidMC => {
            let sampler = cfg.sampler.with_seed(seed::derive(cfg.sampler.seed, polytope.len() as u64));
            centroid_estimate(polytope, cfg.centroid_samples, &sampler)
        }
    }
}

fn cut(pool: &Pool, index: usize, label: Label) -> Result<Halfspace> {
    let p = LabeledPoint::new(pool.point(index).to_vec(), label)?;
    Ok(Halfspace::from_point(&p, Some(index)))
}

/// Runs the active cutting-plane loop until `budget` labels are purchased or
/// the pool runs out.
pub fn run_active<O: LabelOracle + ?Sized>(
    pool: &Pool,
    oracle: &mut O,
    init_labeled: &[(usize, Label)],
    cfg: &ActiveConfig,
) -> Result<ActiveRun> {
    if cfg.budget == 0 {
        return Err(Error::InvalidConfig("budget must be at least 1".into()));
    }
    let mut polytope = SphericalPolytope::ball(pool.dim());
    let mut marked = vec![false; pool.len()];
    for &(i, y) in init_labeled {
        if i >= pool.len() {
            return Err(Error::IndexOutOfRange { index: i, len: pool.len() });
        }
        if !marked[i] {
            marked[i] = true;
            polytope.push(cut(pool, i, y)?)?;
        }
    }
    let mut center = compute_center(&polytope, cfg)?;
    let mut centers = vec![center.clone()];
    let mut queried = Vec::new();
    while queried.len() < cfg.budget && marked.iter().any(|m| !m) {
        let round = queried.len() as u64;
        let index = match cfg.rule {
            QueryRule::Center(kind) => select_query(&center, pool, &marked, kind)?,
            QueryRule::Random { seed: s } => random_query(pool, &marked, seed::derive(s, round))?,
        };
        let label = oracle.label(index);
        let was_violated = label.sign() * dot(&center.point, pool.point(index)) < 0.0;
        marked[index] = true;
        if was_violated {
            polytope.push(cut(pool, index, label)?)?;
            center = compute_center(&polytope, cfg)?;
        }
        queried.push(QueryRecord { index, label, was_violated });
        centers.push(center.clone());
        if let Some(stop) = cfg.volume_stop {
            let small = match estimate_volume(&polytope, stop.samples, stop.seed) {
                Ok(v) => v.value < stop.threshold,
                Err(Error::ZeroAcceptance { .. }) => true,
                Err(e) => return Err(e),
            };
            if small {
                break;
            }
        }
    }
    Ok(ActiveRun {
        center_method: cfg.method,
        rule: cfg.rule,
        init: init_labeled.to_vec(),
        queried,
        centers,
        polytope,
        budget: cfg.budget,
    })
}

/// Fraction of `test` classified correctly by `sign(⟨w, x⟩)`, `sign(0) = +1`.
pub fn accuracy(w: &[f64], test: &Dataset) -> f64 {
    let ok = test.points().iter().filter(|p| Label::of(dot(w, p.x())) == p.y()).count();
    ok as f64 / test.len() as f64
}
