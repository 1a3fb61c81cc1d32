//! Monte-Carlo volumes, hypercone closed forms, and empirical checks of the
//! centroid partition bounds.
//!
//! Volumes come from rejection sampling against the unit ball, whose volume
//! `Π_d = π^{d/2} / Γ(d/2 + 1)` is known exactly.

use std::f64::consts::{E, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, normalized};
use crate::seed;
use crate::versionspace::SphericalPolytope;

/// Smallest sample count accepted by [`estimate_volume`].
pub const MIN_VOLUME_SAMPLES: usize = 1000;

/// Volume of the unit ball in `d` dimensions, `Π_0 = 1`, `Π_1 = 2`,
/// `Π_d = Π_{d-2} · 2π / d`.
pub fn ball_volume_constant(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => ball_volume_constant(d - 2) * 2.0 * PI / d as f64,
    }
}

/// Uniform point in the unit `d`-ball: Gaussian direction, radius `U^{1/d}`.
pub fn sample_unit_ball<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = normalized(&g) {
            let r = rng.random::<f64>().powf(1.0 / d as f64);
            return u.into_iter().map(|x| x * r).collect();
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolumeMethod {
    RejectionFromBall,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub method: VolumeMethod,
}

impl VolumeEstimate {
    fn from_counts(d: usize, hits: usize, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        let pi_d = ball_volume_constant(d);
        Self {
            value: pi_d * p,
            stderr: pi_d * (p * (1.0 - p) / n as f64).sqrt(),
            n_samples: n,
            method: VolumeMethod::RejectionFromBall,
        }
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_VOLUME_SAMPLES {
        return Err(Error::InvalidConfig(format!("need at least {MIN_VOLUME_SAMPLES} samples, got {n}")));
    }
    Ok(())
}

/// Rejection estimate of the polytope volume from `n` ball samples.
pub fn estimate_volume(polytope: &SphericalPolytope, n: usize, seed: u64) -> Result<VolumeEstimate> {
    check_samples(n)?;
    let d = polytope.dim();
    let mut rng = seed::rng(seed);
    let hits = (0..n)
        .filter(|_| polytope.contains_unchecked(&sample_unit_ball(d, &mut rng)))
        .count();
    if hits == 0 {
        return Err(Error::ZeroAcceptance { n });
    }
    Ok(VolumeEstimate::from_counts(d, hits, n))
}

/// Right circular cone in `dim` dimensions over a `(dim-1)`-ball of radius
/// `base_radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperCone {
    pub dim: usize,
    pub base_radius: f64,
    pub height: f64,
    pub axis: Vec<f64>,
}

impl HyperCone {
    pub fn new(dim: usize, base_radius: f64, height: f64, axis: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DegenerateBody("cone needs dimension at least 2"));
        }
        if !(base_radius > 0.0 && height > 0.0) {
            return Err(Error::DegenerateBody("cone radius and height must be positive"));
        }
        if axis.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: axis.len() });
        }
        let axis = normalized(&axis).ok_or(Error::ZeroVector)?;
        Ok(Self { dim, base_radius, height, axis })
    }
}

/// `Π_n R^n H / (n+1)` with `n = dim - 1`.
pub fn cone_volume(cone: &HyperCone) -> f64 {
    let n = cone.dim - 1;
    ball_volume_constant(n) * cone.base_radius.powi(n as i32) * cone.height / (n + 1) as f64
}

/// Distance of the centroid from the base along the axis, `H / (n+2)`.
pub fn cone_centroid_offset(cone: &HyperCone) -> f64 {
    cone.height / (cone.dim + 1) as f64
}

/// Fraction of a cone's volume on the apex side of the hyperplane through its
/// centroid parallel to the base, `(1 - 1/(n+2))^{n+1}`.
pub fn cone_partition_ratio(dim: usize) -> f64 {
    let n = dim as f64 - 1.0;
    (1.0 - 1.0 / (n + 2.0)).powf(n + 1.0)
}

/// Heights and section radius of a body relative to a cut direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BodyStats {
    pub d: usize,
    pub vol: f64,
    pub h_plus: f64,
    pub h_minus: f64,
    pub r_base: f64,
}

/// Returns `(Λ, e⁻¹(1-λ)^d)`.
pub fn generalized_bound(lambda: f64, stats: &BodyStats) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    if stats.d < 2 {
        return Err(Error::DegenerateBody("dimension must be at least 2"));
    }
    if stats.h_minus <= 0.0 {
        return Err(Error::DegenerateBody("H- must be positive"));
    }
    if stats.r_base <= 0.0 {
        return Err(Error::DegenerateBody("section radius must be positive"));
    }
    let bound = (-1.0f64).exp() * (1.0 - lambda).powi(stats.d as i32);
    if lambda == 0.0 {
        return Ok((0.0, bound));
    }
    let n = stats.d - 1;
    let nf = n as f64;
    let big = lambda * (nf + 1.0) * stats.vol / (ball_volume_constant(n) * stats.r_base.powi(n as i32))
        * (stats.h_plus / ((nf + 2.0) * stats.h_minus)).powi(n as i32)
        * (1.0 - 1.0 / (nf + 2.0));
    Ok((big, bound))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Ball samples per volume estimate.
    pub samples: usize,
    pub seed: u64,
    /// Half-width of the slab used to measure the cross-section.
    pub slab_eps: f64,
}

impl VerifyConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, slab_eps: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionReport {
    pub body: String,
    pub lambda: f64,
    pub d: usize,
    /// Offset `Λ` of the cut from the centroid.
    pub offset: f64,
    pub vol_total: VolumeEstimate,
    pub vol_plus: VolumeEstimate,
    pub vol_minus: VolumeEstimate,
    /// `vol_plus / vol_total`.
    pub ratio: f64,
    /// `vol_minus / vol_total`.
    pub ratio_minus: f64,
    /// Binomial standard error of `ratio` over accepted samples.
    pub ratio_stderr: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Accepted ball samples of a body, drawn from one seed.
struct Cloud {
    d: usize,
    n: usize,
    pts: Vec<Vec<f64>>,
}

impl Cloud {
    fn draw(polytope: &SphericalPolytope, n: usize, seed: u64) -> Result<Self> {
        check_samples(n)?;
        let d = polytope.dim();
        let mut rng = seed::rng(seed);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| sample_unit_ball(d, &mut rng))
            .filter(|s| polytope.contains_unchecked(s))
            .collect();
        if pts.is_empty() {
            return Err(Error::ZeroAcceptance { n });
        }
        Ok(Self { d, n, pts })
    }

    fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for p in &self.pts {
            for (mi, pi) in m.iter_mut().zip(p) {
                *mi += pi;
            }
        }
        let k = self.pts.len() as f64;
        m.iter_mut().for_each(|x| *x /= k);
        m
    }

    /// Signed offsets `⟨v, s - x⟩` of every sample.
    fn projections(&self, v: &[f64], x: &[f64]) -> Vec<f64> {
        let shift = dot(v, x);
        self.pts.iter().map(|s| dot(v, s) - shift).collect()
    }
}

fn unit_normal(normal: &[f64], d: usize) -> Result<Vec<f64>> {
    if normal.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: normal.len() });
    }
    normalized(normal).ok_or(Error::ZeroVector)
}

fn split_report(body: &str, cloud: &Cloud, proj: &[f64], lambda: f64, offset: f64, bound: f64, both_sides: bool) -> PartitionReport {
    let acc = cloud.pts.len();
    let plus = proj.iter().filter(|&&t| t >= 0.0).count();
    let minus = acc - plus;
    let ratio = plus as f64 / acc as f64;
    let ratio_minus = minus as f64 / acc as f64;
    let ratio_stderr = (ratio * (1.0 - ratio) / acc as f64).sqrt();
    let mut satisfied = ratio >= bound - 3.0 * ratio_stderr;
    if both_sides {
        satisfied &= ratio_minus >= bound - 3.0 * ratio_stderr;
    }
    PartitionReport {
        body: body.to_string(),
        lambda,
        d: cloud.d,
        offset,
        vol_total: VolumeEstimate::from_counts(cloud.d, acc, cloud.n),
        vol_plus: VolumeEstimate::from_counts(cloud.d, plus, cloud.n),
        vol_minus: VolumeEstimate::from_counts(cloud.d, minus, cloud.n),
        ratio,
        ratio_minus,
        ratio_stderr,
        bound,
        satisfied,
    }
}

/// Splits the body by the hyperplane through its MC centroid with the given
/// normal and checks both sides keep at least `e⁻¹` of the volume.
///
/// The centroid and the partition volumes use independent sample sets.
pub fn grunbaum_check(body: &str, polytope: &SphericalPolytope, normal: &[f64], cfg: &VerifyConfig) -> Result<PartitionReport> {
    let v = unit_normal(normal, polytope.dim())?;
    let cg = Cloud::draw(polytope, cfg.samples, seed::derive(cfg.seed, 0))?.mean();
    let cloud = Cloud::draw(polytope, cfg.samples, seed::derive(cfg.seed, 1))?;
    let proj = cloud.projections(&v, &cg);
    Ok(split_report(body, &cloud, &proj, 0.0, 0.0, 1.0 / E, true))
}

/// Measures [`BodyStats`] relative to the hyperplane through `cg` with unit
/// normal `v`.
fn body_stats(cloud: &Cloud, proj: &[f64], eps: f64) -> Result<BodyStats> {
    let h_plus = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h_minus = -proj.iter().copied().fold(f64::INFINITY, f64::min);
    let in_slab = proj.iter().filter(|t| t.abs() <= eps).count();
    if in_slab == 0 {
        return Err(Error::DegenerateBody("no samples near the cut"));
    }
    let section = ball_volume_constant(cloud.d) * in_slab as f64 / cloud.n as f64 / (2.0 * eps);
    let n = cloud.d - 1;
    let r_base = (section / ball_volume_constant(n)).powf(1.0 / n as f64);
    Ok(BodyStats {
        d: cloud.d,
        vol: ball_volume_constant(cloud.d) * cloud.pts.len() as f64 / cloud.n as f64,
        h_plus,
        h_minus: h_minus.max(0.0),
        r_base,
    })
}

/// Offsets the centroid cut by `Λ` along the normal and checks that the
/// positive side keeps at least `e⁻¹(1-λ)^d` of the volume. At `λ = 0` this
/// is exactly [`grunbaum_check`].
pub fn generalized_partition_check(
    body: &str,
    polytope: &SphericalPolytope,
    normal: &[f64],
    lambda: f64,
    cfg: &VerifyConfig,
) -> Result<PartitionReport> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    if lambda == 0.0 {
        return grunbaum_check(body, polytope, normal, cfg);
    }
    let d = polytope.dim();
    if d < 2 {
        return Err(Error::DegenerateBody("dimension must be at least 2"));
    }
    let v = unit_normal(normal, d)?;
    let cg = Cloud::draw(polytope, cfg.samples, seed::derive(cfg.seed, 0))?.mean();
    let cloud = Cloud::draw(polytope, cfg.samples, seed::derive(cfg.seed, 1))?;
    let stats = body_stats(&cloud, &cloud.projections(&v, &cg), cfg.slab_eps)?;
    let (big, bound) = generalized_bound(lambda, &stats)?;
    let x: Vec<f64> = cg.iter().zip(&v).map(|(c, vi)| c + big * vi).collect();
    if !polytope.contains_unchecked(&x) {
        return Err(Error::OffsetOutsideBody);
    }
    let proj = cloud.projections(&v, &x);
    Ok(split_report(body, &cloud, &proj, lambda, big, bound, false))
}

/// Unit ball cut by `1..=d+1` random halfspaces through the origin, all
/// admitting a random interior direction with margin at least `0.1`.
pub fn random_polytope(d: usize, seed: u64) -> SphericalPolytope {
    let mut rng = seed::rng(seed);
    let w0 = loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = normalized(&g) {
            break u;
        }
    };
    let k = rng.random_range(1..=d + 1);
    let mut normals = Vec::with_capacity(k);
    while normals.len() < k {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let Some(mut a) = normalized(&g) else { continue };
        if dot(&a, &w0) < 0.0 {
            a.iter_mut().for_each(|x| *x = -*x);
        }
        if dot(&a, &w0) >= 0.1 {
            normals.push(a);
        }
    }
    SphericalPolytope::from_normals(d, &normals).expect("normals are nonzero and share a dimension")
}

/// Uniform random unit vector.
pub fn random_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = normalized(&g) {
            return u;
        }
    }
}
