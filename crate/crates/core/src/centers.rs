//! Query points for a spherical polytope: hit-and-run sampling, Monte-Carlo
//! center of gravity, and the Chebyshev center.
//!
//! The Chebyshev center is obtained from the max-min-margin direction
//! `u* = argmax_{‖u‖=1} min_i ⟨a_i, u⟩`. With `m = min_i ⟨a_i, u*⟩`, the
//! largest ball inside `{‖w‖ ≤ 1, ⟨a_i, w⟩ ≥ 0}` has center `u*/(1+m)` and
//! radius `m/(1+m)`: along `ρu*` the two binding constraints are
//! `⟨a_i, c⟩ ≥ r` (so `r ≤ ρm`) and `‖c‖ + r ≤ 1` (so `r ≤ 1 - ρ`), which
//! meet at `ρ = 1/(1+m)`. The direction itself is the minimum-norm point of
//! the convex hull of the normals, found with Wolfe's active-set method.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, normalized, scaled};
use crate::seed;
use crate::versionspace::SphericalPolytope;

/// Chords shorter than this count as collapsed.
pub const MIN_CHORD: f64 = 1e-12;
/// Consecutive collapsed chords tolerated before giving up.
pub const MAX_COLLAPSES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(burn_in: usize, thinning: usize, seed: u64) -> Result<Self> {
        if thinning == 0 {
            return Err(Error::InvalidConfig("thinning must be at least 1".into()));
        }
        Ok(Self { burn_in, thinning, seed })
    }

    /// Burn-in `10·d²`, thinning `d`.
    pub fn for_dim(dim: usize, seed: u64) -> Self {
        Self { burn_in: 10 * dim * dim, thinning: dim.max(1), seed }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CenterMethod {
    CentroidMC,
    Chebyshev,
}

impl CenterMethod {
    pub fn name(self) -> &'static str {
        match self {
            CenterMethod::CentroidMC => "centroid",
            CenterMethod::Chebyshev => "chebyshev",
        }
    }
}

impl std::str::FromStr for CenterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "centroid" | "centroid-mc" | "bpm" => Ok(CenterMethod::CentroidMC),
            "chebyshev" | "svm" => Ok(CenterMethod::Chebyshev),
            other => Err(Error::InvalidConfig(format!("unknown center method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CenterEstimate {
    pub point: Vec<f64>,
    pub method: CenterMethod,
    /// Samples averaged; 0 for the Chebyshev center.
    pub n_samples: usize,
    /// Only set by the Chebyshev center.
    pub inscribed_radius: Option<f64>,
}

/// Feasible step interval `[lo, hi]` from `x` along `u`.
fn chord(polytope: &SphericalPolytope, x: &[f64], u: &[f64]) -> (f64, f64) {
    let b = dot(x, u);
    let c = dot(x, x) - 1.0;
    let s = (b * b - c).max(0.0).sqrt();
    let (mut lo, mut hi) = (-b - s, -b + s);
    for h in polytope.halfspaces() {
        let au = h.margin(u);
        let ax = h.margin(x);
        if au > 0.0 {
            lo = lo.max(-ax / au);
        } else if au < 0.0 {
            hi = hi.min(-ax / au);
        }
    }
    (lo, hi)
}

fn random_direction<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = normalized(&g) {
            return u;
        }
    }
}

fn step<R: Rng>(polytope: &SphericalPolytope, x: &mut Vec<f64>, rng: &mut R) -> Result<()> {
    let dim = x.len();
    for _ in 0..MAX_COLLAPSES {
        let u = random_direction(rng, dim);
        let (lo, hi) = chord(polytope, x, &u);
        if hi - lo < MIN_CHORD {
            continue;
        }
        let t = lo + (hi - lo) * rng.random::<f64>();
        let mut next = x.clone();
        axpy(t, &u, &mut next);
        // endpoints can land a rounding error outside; such draws are redone
        if polytope.contains_unchecked(&next) {
            *x = next;
            return Ok(());
        }
    }
    Err(Error::ChordCollapse { attempts: MAX_COLLAPSES })
}

/// Draws `n` approximately uniform points from the polytope with hit-and-run.
///
/// The chain starts at the Chebyshev center, discards `burn_in` steps and
/// keeps one point every `thinning` steps. Every constraint passes through the
/// origin, so a chain started there only moves along directions inside the
/// cone and stalls once the cone is narrow; the origin is used only when no
/// interior point exists, which then ends in [`Error::ChordCollapse`].
pub fn hit_and_run(polytope: &SphericalPolytope, n: usize, cfg: &SamplerConfig) -> Result<Vec<Vec<f64>>> {
    if cfg.thinning == 0 {
        return Err(Error::InvalidConfig("thinning must be at least 1".into()));
    }
    let mut rng = seed::rng(cfg.seed);
    let mut x = chebyshev_center(polytope, 1e-10, 10_000)
        .map(|c| c.point)
        .unwrap_or_else(|_| vec![0.0; polytope.dim()]);
    for _ in 0..cfg.burn_in {
        step(polytope, &mut x, &mut rng)?;
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..cfg.thinning {
            step(polytope, &mut x, &mut rng)?;
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Mean of `m` hit-and-run samples.
pub fn centroid_estimate(polytope: &SphericalPolytope, m: usize, cfg: &SamplerConfig) -> Result<CenterEstimate> {
    if m == 0 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    let samples = hit_and_run(polytope, m, cfg)?;
    let mut mean = vec![0.0; polytope.dim()];
    for s in &samples {
        axpy(1.0, s, &mut mean);
    }
    Ok(CenterEstimate {
        point: scaled(1.0 / m as f64, &mean),
        method: CenterMethod::CentroidMC,
        n_samples: m,
        inscribed_radius: None,
    })
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
///
/// Returns the point and the gap `(‖x‖² - min_i ⟨x, p_i⟩) / ‖x‖`, which
/// bounds how far `min_i ⟨p_i, x/‖x‖⟩` is from the optimal margin.
pub(crate) fn min_norm_point(points: &[&[f64]], tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64)> {
    let dim = points[0].len();
    let combine = |corral: &[usize], weights: &[f64]| {
        let mut x = vec![0.0; dim];
        for (&i, &w) in corral.iter().zip(weights) {
            axpy(w, points[i], &mut x);
        }
        x
    };
    let start = (0..points.len())
        .min_by(|&i, &j| dot(points[i], points[i]).total_cmp(&dot(points[j], points[j])))
        .unwrap();
    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    let mut x = points[start].to_vec();

    for _ in 0..max_iter {
        let xx = dot(&x, &x);
        let (j, xp) = (0..points.len())
            .map(|i| (i, dot(&x, points[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let xn = xx.sqrt();
        if xn <= tol {
            return Ok((x, 0.0));
        }
        let gap = (xx - xp) / xn;
        if gap <= tol || corral.contains(&j) {
            return Ok((x, gap.max(0.0)));
        }
        corral.push(j);
        lambda.push(0.0);
        loop {
            let mu = affine_minimizer(points, &corral);
            if mu.iter().all(|&v| v > 1e-14) {
                lambda = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lambda.iter().zip(&mu) {
                if *m <= 1e-14 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l = theta * m + (1.0 - theta) * *l;
            }
            let mut k = 0;
            while k < corral.len() {
                if lambda[k] <= 1e-14 {
                    corral.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            if corral.is_empty() {
                // numerically degenerate corral; restart from the latest vertex
                corral.push(j);
                lambda.push(1.0);
                break;
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            if corral.len() == 1 {
                lambda = vec![1.0];
                break;
            }
        }
        x = combine(&corral, &lambda);
    }
    Err(Error::MaxIterExceeded(max_iter))
}

/// Weights `μ` (summing to one) of the min-norm point of the affine hull.
fn affine_minimizer(points: &[&[f64]], corral: &[usize]) -> Vec<f64> {
    let k = corral.len();
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            m[(a, b)] = dot(points[corral[a]], points[corral[b]]);
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = m
        .clone()
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| m.svd(true, true).solve(&rhs, 1e-12).expect("svd solve"));
    sol.iter().take(k).copied().collect()
}

/// Center and radius of the largest ball inscribed in the polytope.
pub fn chebyshev_center(polytope: &SphericalPolytope, tol: f64, max_iter: usize) -> Result<CenterEstimate> {
    let dim = polytope.dim();
    if polytope.is_empty() {
        return Ok(CenterEstimate {
            point: vec![0.0; dim],
            method: CenterMethod::Chebyshev,
            n_samples: 0,
            inscribed_radius: Some(1.0),
        });
    }
    let normals: Vec<&[f64]> = polytope.halfspaces().iter().map(|h| h.normal()).collect();
    let (x, _) = min_norm_point(&normals, tol, max_iter)?;
    let u = normalized(&x).ok_or(Error::NotSeparable { margin: 0.0 })?;
    let margin = polytope
        .halfspaces()
        .iter()
        .map(|h| h.margin(&u))
        .fold(f64::INFINITY, f64::min);
    if margin <= tol {
        return Err(Error::NotSeparable { margin });
    }
    let rho = 1.0 / (1.0 + margin);
    Ok(CenterEstimate {
        point: scaled(rho, &u),
        method: CenterMethod::Chebyshev,
        n_samples: 0,
        inscribed_radius: Some(margin * rho),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn half_disk() -> SphericalPolytope {
        SphericalPolytope::from_normals(2, &[vec![1.0, 0.0]]).unwrap()
    }

    fn quarter_disk() -> SphericalPolytope {
        SphericalPolytope::from_normals(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    /// Brute-force inscribed-ball search over a grid of centers.
    fn grid_chebyshev(p: &SphericalPolytope, step: f64) -> (Vec<f64>, f64) {
        let mut best = (vec![0.0, 0.0], f64::NEG_INFINITY);
        let n = (1.0 / step) as i64;
        for i in -n..=n {
            for j in -n..=n {
                let c = [i as f64 * step, j as f64 * step];
                let r = p
                    .halfspaces()
                    .iter()
                    .map(|h| h.margin(&c))
                    .fold(1.0 - dot(&c, &c).sqrt(), f64::min);
                if r > best.1 {
                    best = (c.to_vec(), r);
                }
            }
        }
        best
    }

    #[test]
    fn chebyshev_of_bare_ball() {
        let c = chebyshev_center(&SphericalPolytope::ball(3), 1e-12, 100).unwrap();
        assert_eq!(c.point, vec![0.0; 3]);
        assert_eq!(c.inscribed_radius, Some(1.0));
    }

    #[test]
    fn chebyshev_half_disk_matches_grid() {
        let c = chebyshev_center(&half_disk(), 1e-12, 100).unwrap();
        assert!((c.point[0] - 0.5).abs() < 1e-9 && c.point[1].abs() < 1e-9);
        assert!((c.inscribed_radius.unwrap() - 0.5).abs() < 1e-9);
        let (gc, gr) = grid_chebyshev(&half_disk(), 1e-3);
        assert!((gc[0] - 0.5).abs() <= 2e-3 && gc[1].abs() <= 2e-3);
        assert!(gr <= 0.5 + 1e-9);
    }

    #[test]
    fn chebyshev_quarter_disk_matches_grid() {
        let c = chebyshev_center(&quarter_disk(), 1e-12, 100).unwrap();
        let m = (0.5f64).sqrt();
        let rho = 1.0 / (1.0 + m);
        assert!((c.point[0] - rho * m).abs() < 1e-9 && (c.point[1] - rho * m).abs() < 1e-9);
        assert!((dot(&c.point, &c.point).sqrt() - 0.586).abs() < 1e-3);
        assert!((c.inscribed_radius.unwrap() - 0.414).abs() < 1e-3);
        let (_, gr) = grid_chebyshev(&quarter_disk(), 1e-3);
        assert!(gr <= c.inscribed_radius.unwrap() + 1e-9);
        assert!(gr >= c.inscribed_radius.unwrap() - 2e-3);
    }

    #[test]
    fn chebyshev_certificate_on_random_polytopes() {
        let mut rng = seed::rng(3);
        for _ in 0..50 {
            let d = rng.random_range(2..6);
            let axis = random_direction(&mut rng, d);
            let k = rng.random_range(1..12);
            let normals: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    let mut a = random_direction(&mut rng, d);
                    if dot(&a, &axis) < 0.1 {
                        axpy(0.5, &axis, &mut a);
                    }
                    a
                })
                .collect();
            let p = SphericalPolytope::from_normals(d, &normals).unwrap();
            let tol = 1e-10;
            let Ok(c) = chebyshev_center(&p, tol, 10_000) else { continue };
            let r = c.inscribed_radius.unwrap();
            for h in p.halfspaces() {
                assert!(h.margin(&c.point) >= r - tol);
            }
            assert!(dot(&c.point, &c.point).sqrt() + r <= 1.0 + tol);
            // no random feasible center does better
            for _ in 0..2000 {
                let z: Vec<f64> = scaled(rng.random::<f64>(), &random_direction(&mut rng, d));
                let rz = p.halfspaces().iter().map(|h| h.margin(&z)).fold(1.0 - dot(&z, &z).sqrt(), f64::min);
                assert!(rz <= r + 10.0 * tol);
            }
        }
    }

    #[test]
    fn chebyshev_rejects_empty_interior() {
        let p = SphericalPolytope::from_normals(2, &[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(matches!(chebyshev_center(&p, 1e-9, 100), Err(Error::NotSeparable { .. })));
    }

    #[test]
    fn samples_stay_inside() {
        let p = SphericalPolytope::from_normals(3, &[vec![1.0, 0.2, 0.0], vec![0.0, 1.0, -0.3]]).unwrap();
        let s = hit_and_run(&p, 2000, &SamplerConfig::for_dim(3, 9)).unwrap();
        assert!(s.iter().all(|x| p.contains(x).unwrap()));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let p = quarter_disk();
        let cfg = SamplerConfig::for_dim(2, 42);
        assert_eq!(hit_and_run(&p, 100, &cfg).unwrap(), hit_and_run(&p, 100, &cfg).unwrap());
        assert_ne!(hit_and_run(&p, 100, &cfg).unwrap(), hit_and_run(&p, 100, &cfg.with_seed(43)).unwrap());
    }

    #[test]
    fn bare_disk_mean_near_origin() {
        let n = 10_000;
        let s = hit_and_run(&SphericalPolytope::ball(2), n, &SamplerConfig::for_dim(2, 1)).unwrap();
        for k in 0..2 {
            let mean = s.iter().map(|x| x[k]).sum::<f64>() / n as f64;
            // per-coordinate variance on the unit disk is 1/4; allow for chain correlation
            let stderr = (0.25 / n as f64).sqrt();
            assert!(mean.abs() < 3.0 * 2.0 * stderr, "mean {mean}");
        }
    }

    #[test]
    fn half_disk_centroid() {
        let c = centroid_estimate(&half_disk(), 100_000, &SamplerConfig::for_dim(2, 5)).unwrap();
        assert!((c.point[0] - 4.0 / (3.0 * PI)).abs() < 0.02);
        assert!(c.point[1].abs() < 0.02);
        assert_eq!(c.n_samples, 100_000);
    }

    #[test]
    fn quarter_disk_centroid_against_rejection_oracle() {
        // oracle: plain rejection sampling from the bounding square
        let mut rng = seed::rng(77);
        let (mut sx, mut sy, mut cnt) = (0.0, 0.0, 0usize);
        while cnt < 400_000 {
            let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
            if x * x + y * y <= 1.0 {
                sx += x;
                sy += y;
                cnt += 1;
            }
        }
        let oracle = [sx / cnt as f64, sy / cnt as f64];
        assert!((oracle[0] - 4.0 / (3.0 * PI)).abs() < 0.002);
        let c = centroid_estimate(&quarter_disk(), 100_000, &SamplerConfig::for_dim(2, 6)).unwrap();
        assert!((c.point[0] - c.point[1]).abs() < 0.02);
        assert!((c.point[0] - oracle[0]).abs() < 0.02 && (c.point[1] - oracle[1]).abs() < 0.02);
    }

    #[test]
    fn collapse_on_empty_interior() {
        let p = SphericalPolytope::from_normals(2, &[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert!(matches!(
            hit_and_run(&p, 1, &SamplerConfig::for_dim(2, 0)),
            Err(Error::ChordCollapse { .. })
        ));
    }

    #[test]
    fn thinning_must_be_positive() {
        assert!(SamplerConfig::new(0, 0, 1).is_err());
        let bad = SamplerConfig { burn_in: 0, thinning: 0, seed: 0 };
        assert!(hit_and_run(&SphericalPolytope::ball(2), 1, &bad).is_err());
    }
}
