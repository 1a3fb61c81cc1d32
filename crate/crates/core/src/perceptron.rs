//! Perceptron-driven cutting-plane localization.
//!
//! Each round runs a warm-started Perceptron over the cutting planes picked
//! so far, queries the normalized result, and asks the oracle strategy for a
//! new violated constraint until the query lands in the version space. The
//! sequence of picked planes is the compression set of the run.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, lex_cmp, norm, normalized};
use crate::seed;
use crate::versionspace::{build_version_space, Dataset, SphericalPolytope};

/// Smallest margin the default update budget is sized for.
pub const GAMMA_MIN: f64 = 1e-4;

/// `ceil(1 / GAMMA_MIN²)`.
pub fn default_update_budget() -> u64 {
    (1.0 / (GAMMA_MIN * GAMMA_MIN)).ceil() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    LargestError,
    SmallestError,
    RandomError,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::LargestError => "largest-error",
            StrategyKind::SmallestError => "smallest-error",
            StrategyKind::RandomError => "random-error",
        }
    }
}

/// How the cutting-plane oracle chooses among violated constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OracleStrategy {
    pub kind: StrategyKind,
    /// Only read by [`StrategyKind::RandomError`].
    pub seed: u64,
}

impl OracleStrategy {
    pub const fn largest_error() -> Self {
        Self { kind: StrategyKind::LargestError, seed: 0 }
    }

    pub const fn smallest_error() -> Self {
        Self { kind: StrategyKind::SmallestError, seed: 0 }
    }

    pub const fn random_error(seed: u64) -> Self {
        Self { kind: StrategyKind::RandomError, seed }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }
}

impl fmt::Display for OracleStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "largest-error" | "largest" => Ok(StrategyKind::LargestError),
            "smallest-error" | "smallest" => Ok(StrategyKind::SmallestError),
            "random-error" | "random" => Ok(StrategyKind::RandomError),
            other => Err(Error::InvalidConfig(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Result of [`localize`].
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationTrace {
    pub w_final: Vec<f64>,
    /// Dataset indices of the picked cutting planes, in pick order.
    pub plane_indices: Vec<usize>,
    /// Perceptron updates performed after each cutting plane.
    pub updates_per_round: Vec<u64>,
    pub total_updates: u64,
    /// Normalized query point after each cutting plane; the last one is `w_final`.
    pub query_points: Vec<Vec<f64>>,
}

impl LocalizationTrace {
    pub fn num_planes(&self) -> usize {
        self.plane_indices.len()
    }
}

/// Violation scan shared by the Perceptron loop and the oracle: `w` is
/// viewed through its direction, and the zero vector violates everything.
fn direction(w: &[f64]) -> Option<Vec<f64>> {
    normalized(w)
}

/// Runs the Perceptron from `w_start` until `⟨w, p⟩ ≥ 0` for every point.
///
/// The update uses the violated point of lowest normalized margin, ties
/// broken by lexicographic order of the point coordinates and then by
/// position. A zero `w` violates every point.
pub fn perceptron_pass(w_start: &[f64], constraint_points: &[Vec<f64>], budget: u64) -> Result<(Vec<f64>, u64)> {
    let mut w = w_start.to_vec();
    for p in constraint_points {
        if p.len() != w.len() {
            return Err(Error::DimensionMismatch { expected: w.len(), found: p.len() });
        }
    }
    let norms: Vec<f64> = constraint_points.iter().map(|p| norm(p)).collect();
    let mut updates = 0u64;
    loop {
        let dir = direction(&w);
        let mut pick: Option<(usize, f64)> = None;
        for (i, p) in constraint_points.iter().enumerate() {
            let raw = match &dir {
                Some(d) => dot(d, p),
                None => -0.0,
            };
            if dir.is_some() && raw >= 0.0 {
                continue;
            }
            let m = if dir.is_some() { raw / norms[i] } else { 0.0 };
            let better = match pick {
                None => true,
                Some((j, mj)) => match m.total_cmp(&mj) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => lex_cmp(p, &constraint_points[j]) == Ordering::Less,
                },
            };
            if better {
                pick = Some((i, m));
            }
        }
        let Some((i, _)) = pick else {
            return Ok((w, updates));
        };
        if updates >= budget {
            return Err(Error::UpdateBudgetExceeded { budget });
        }
        axpy(1.0, &constraint_points[i], &mut w);
        updates += 1;
    }
}

fn better_by(ord: Ordering, x_new: &[f64], x_old: &[f64]) -> bool {
    match ord {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => lex_cmp(x_new, x_old) == Ordering::Less,
    }
}

/// Picks a violated cutting plane (a dataset index) for the query `w`.
///
/// `version_space` must be `build_version_space(dataset)`. A zero `w`
/// violates every constraint with margin 0. `round` is the number of planes
/// picked so far; `RandomError` keys its draw on it so that the choice is a
/// function of the round, the seed and the candidate points only.
pub fn pick_cutting_plane(
    w: &[f64],
    version_space: &SphericalPolytope,
    dataset: &Dataset,
    strategy: OracleStrategy,
    round: u64,
) -> Result<usize> {
    if w.len() != dataset.dim() {
        return Err(Error::DimensionMismatch { expected: dataset.dim(), found: w.len() });
    }
    debug_assert_eq!(version_space.len(), dataset.len());
    let zero = crate::linalg::is_zero(w);
    let mut best: Option<(usize, f64, u64)> = None;
    for (n, h) in version_space.halfspaces().iter().enumerate() {
        let m = if zero { 0.0 } else { h.margin(w) };
        if !zero && m >= 0.0 {
            continue;
        }
        let x = dataset.point(n).x();
        let key = match strategy.kind {
            StrategyKind::RandomError => seed::hash_point(strategy.seed, round, x),
            _ => 0,
        };
        let better = match best {
            None => true,
            Some((j, mj, kj)) => {
                let xj = dataset.point(j).x();
                match strategy.kind {
                    StrategyKind::LargestError => better_by(m.total_cmp(&mj), x, xj),
                    StrategyKind::SmallestError => better_by(mj.total_cmp(&m), x, xj),
                    StrategyKind::RandomError => better_by(key.cmp(&kj), x, xj),
                }
            }
        };
        if better {
            best = Some((n, m, key));
        }
    }
    best.map(|(n, _, _)| n).ok_or(Error::NoViolatedConstraint)
}

/// Perceptron-based localization of a point in the constrained version space.
pub fn localize(dataset: &Dataset, strategy: OracleStrategy, update_budget: u64) -> Result<LocalizationTrace> {
    let vs = build_version_space(dataset)?;
    let dim = dataset.dim();
    let mut w_tilde = vec![0.0; dim];
    let mut plane_indices = Vec::new();
    let mut constraints: Vec<Vec<f64>> = Vec::new();
    let mut updates_per_round = Vec::new();
    let mut query_points = Vec::new();
    let mut total = 0u64;
    loop {
        let query = direction(&w_tilde);
        if let Some(q) = &query {
            if vs.contains_unchecked(q) {
                break;
            }
        }
        let probe = query.unwrap_or_else(|| vec![0.0; dim]);
        let n = pick_cutting_plane(&probe, &vs, dataset, strategy, plane_indices.len() as u64)?;
        plane_indices.push(n);
        constraints.push(vs.halfspaces()[n].normal().to_vec());
        let (w, u) = perceptron_pass(&w_tilde, &constraints, update_budget - total)
            .map_err(|e| match e {
                Error::UpdateBudgetExceeded { .. } => Error::UpdateBudgetExceeded { budget: update_budget },
                other => other,
            })?;
        total += u;
        updates_per_round.push(u);
        w_tilde = w;
        query_points.push(direction(&w_tilde).ok_or(Error::ZeroVector)?);
    }
    let w_final = query_points.last().cloned().ok_or(Error::EmptyDataset)?;
    Ok(LocalizationTrace { w_final, plane_indices, updates_per_round, total_updates: total, query_points })
}

/// The same Perceptron run once over every constraint of the dataset.
pub fn perceptron_baseline(dataset: &Dataset, update_budget: u64) -> Result<(Vec<f64>, u64)> {
    let vs = build_version_space(dataset)?;
    let normals: Vec<Vec<f64>> = vs.halfspaces().iter().map(|h| h.normal().to_vec()).collect();
    let (w, updates) = perceptron_pass(&vec![0.0; dataset.dim()], &normals, update_budget)?;
    Ok((direction(&w).ok_or(Error::ZeroVector)?, updates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::scaled;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn ds(rows: &[(&[f64], i64)]) -> Dataset {
        Dataset::from_rows(rows.iter().map(|(x, y)| (x.to_vec(), *y)).collect()).unwrap()
    }

    #[test]
    fn pass_already_consistent() {
        let (w, u) = perceptron_pass(&[1.0, 0.0], &[vec![1.0, 0.0]], 10).unwrap();
        assert_eq!((w, u), (vec![1.0, 0.0], 0));
    }

    #[test]
    fn pass_from_zero_takes_one_step() {
        let (w, u) = perceptron_pass(&[0.0, 0.0], &[vec![1.0, 0.0]], 10).unwrap();
        assert_eq!((w, u), (vec![1.0, 0.0], 1));
    }

    #[test]
    fn pass_picks_lowest_margin_first() {
        // from w = (0, 1) the second point is the more violated one, and one
        // update on either point fixes both
        let a = normalized(&[1.0, -0.1]).unwrap();
        let b = normalized(&[1.0, -0.9]).unwrap();
        let (w, u) = perceptron_pass(&[0.0, 1.0], &[a, b.clone()], 10).unwrap();
        assert_eq!(u, 1);
        assert_eq!(w, vec![b[0], 1.0 + b[1]]);
    }

    #[test]
    fn pass_budget_guard_on_contradiction() {
        let r = perceptron_pass(&[0.0, 0.0], &[vec![1.0, 0.0], vec![-1.0, 0.0]], 100);
        assert!(matches!(r, Err(Error::UpdateBudgetExceeded { budget: 100 })));
    }

    /// Novikoff oracle: unit points with margin ≥ 0.2 w.r.t. a hidden unit
    /// separator never need more than 1/γ² updates.
    #[test]
    fn pass_respects_mistake_bound() {
        let mut rng = seed::rng(11);
        for _ in 0..20 {
            let d = 5;
            let w_star = normalized(&(0..d).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>()).unwrap();
            let mut pts = Vec::new();
            while pts.len() < 50 {
                let p = normalized(&(0..d).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>()).unwrap();
                if dot(&p, &w_star) >= 0.2 {
                    pts.push(p);
                }
            }
            let gamma = pts.iter().map(|p| dot(p, &w_star)).fold(f64::INFINITY, f64::min);
            let (w, u) = perceptron_pass(&vec![0.0; d], &pts, 1_000_000).unwrap();
            assert!(u as f64 <= 1.0 / (gamma * gamma));
            assert!(u <= 25);
            assert!(pts.iter().all(|p| dot(&w, p) >= 0.0));
        }
    }

    #[test]
    fn pick_orders_by_margin() {
        let a = normalized(&[1.0, -0.1]).unwrap();
        let b = normalized(&[1.0, -0.9]).unwrap();
        let d = Dataset::from_rows(vec![(a, 1), (b, 1)]).unwrap();
        let vs = build_version_space(&d).unwrap();
        let w = [0.0, 1.0];
        assert_eq!(pick_cutting_plane(&w, &vs, &d, OracleStrategy::largest_error(), 0).unwrap(), 1);
        assert_eq!(pick_cutting_plane(&w, &vs, &d, OracleStrategy::smallest_error(), 0).unwrap(), 0);
    }

    #[test]
    fn pick_single_violation_is_forced() {
        let d = ds(&[(&[1.0, 1.0], 1), (&[1.0, -1.0], 1), (&[-1.0, 0.5], 1)]);
        let vs = build_version_space(&d).unwrap();
        let w = normalized(&[1.0, 0.5]).unwrap();
        for s in [OracleStrategy::largest_error(), OracleStrategy::smallest_error(), OracleStrategy::random_error(3)] {
            assert_eq!(pick_cutting_plane(&w, &vs, &d, s, 0).unwrap(), 2);
        }
    }

    #[test]
    fn pick_without_violation_errors() {
        let d = ds(&[(&[1.0, 0.0], 1)]);
        let vs = build_version_space(&d).unwrap();
        let r = pick_cutting_plane(&[1.0, 0.0], &vs, &d, OracleStrategy::largest_error(), 0);
        assert!(matches!(r, Err(Error::NoViolatedConstraint)));
    }

    #[test]
    fn pick_ties_break_lexicographically() {
        let d = ds(&[(&[2.0, 0.0], -1), (&[1.0, 0.0], -1), (&[1.0, 0.0], -1)]);
        let vs = build_version_space(&d).unwrap();
        for s in [OracleStrategy::largest_error(), OracleStrategy::smallest_error()] {
            assert_eq!(pick_cutting_plane(&[1.0, 0.0], &vs, &d, s, 0).unwrap(), 1);
        }
        // the zero query violates everything with margin 0
        assert_eq!(pick_cutting_plane(&[0.0, 0.0], &vs, &d, OracleStrategy::largest_error(), 0).unwrap(), 1);
    }

    #[test]
    fn random_pick_is_repeatable() {
        let mut rng = seed::rng(5);
        let rows: Vec<(Vec<f64>, i64)> = (0..100)
            .map(|_| (vec![rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)], 1))
            .collect();
        let d = Dataset::from_rows(rows).unwrap();
        let vs = build_version_space(&d).unwrap();
        let w = normalized(&[0.3, -1.0]).unwrap();
        let a = pick_cutting_plane(&w, &vs, &d, OracleStrategy::random_error(7), 4).unwrap();
        let b = pick_cutting_plane(&w, &vs, &d, OracleStrategy::random_error(7), 4).unwrap();
        assert_eq!(a, b);
        assert!(vs.halfspaces()[a].margin(&w) < 0.0);
    }

    #[test]
    fn localize_single_point() {
        let d = ds(&[(&[3.0, 4.0], 1)]);
        let t = localize(&d, OracleStrategy::largest_error(), 100).unwrap();
        assert_eq!(t.plane_indices, vec![0]);
        assert_eq!(t.updates_per_round, vec![1]);
        assert_eq!(t.total_updates, 1);
        assert!((t.w_final[0] - 0.6).abs() < 1e-15 && (t.w_final[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn localize_negative_point_flips_direction() {
        let d = ds(&[(&[0.0, 2.0], -1)]);
        let t = localize(&d, OracleStrategy::smallest_error(), 100).unwrap();
        assert_eq!(t.w_final, scaled(-1.0, &[0.0, 1.0]));
    }

    #[test]
    fn localize_budget_on_contradiction() {
        let d = ds(&[(&[1.0, 0.0], 1), (&[1.0, 0.0], -1)]);
        let r = localize(&d, OracleStrategy::largest_error(), 50);
        assert!(matches!(r, Err(Error::UpdateBudgetExceeded { budget: 50 })));
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [OracleStrategy::largest_error(), OracleStrategy::smallest_error(), OracleStrategy::random_error(1)] {
            assert_eq!(s.name().parse::<StrategyKind>().unwrap(), s.kind);
        }
        assert!("median".parse::<StrategyKind>().is_err());
        assert_eq!(default_update_budget(), 100_000_000);
    }
}
