//! Synthetic separable data on a centered cube.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::random_unit;
use crate::linalg::dot;
use crate::seed;
use crate::versionspace::{Dataset, Label, LabeledPoint};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub n_points: usize,
    /// Edge length of the cube the points are drawn from.
    pub side: f64,
    pub margin_gamma: f64,
    pub seed: u64,
    pub dim: usize,
    /// Reflect negatives through the origin so every label is `+1`. When
    /// false, labels stay `±1` and pruning uses `|⟨w*, x⟩|`.
    pub reflect: bool,
}

impl SyntheticConfig {
    pub fn new(margin_gamma: f64, seed: u64) -> Self {
        Self { n_points: 1000, side: 20.0, margin_gamma, seed, dim: 2, reflect: true }
    }

    fn validate(&self) -> Result<()> {
        if self.margin_gamma.is_nan() || self.margin_gamma < 0.0 {
            return Err(Error::InvalidConfig(format!("margin must be non-negative, got {}", self.margin_gamma)));
        }
        if self.side.is_nan() || self.side <= 0.0 {
            return Err(Error::InvalidConfig(format!("side must be positive, got {}", self.side)));
        }
        if self.dim == 0 || self.n_points == 0 {
            return Err(Error::InvalidConfig("dimension and point count must be positive".into()));
        }
        Ok(())
    }
}

/// Draws a dataset and its ground-truth separator `w*` (unit norm).
///
/// Points are uniform on `[-side/2, side/2]^dim` and labeled by the sign of
/// `⟨w*, x⟩`. Points with `⟨w*, x⟩ < γ` after reflection (or `|⟨w*, x⟩| < γ`
/// without it) are dropped.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<(Dataset, Vec<f64>)> {
    cfg.validate()?;
    let mut rng = seed::rng(cfg.seed);
    let w_star = random_unit(cfg.dim, &mut rng);
    let half = cfg.side / 2.0;
    let mut points = Vec::with_capacity(cfg.n_points);
    for _ in 0..cfg.n_points {
        let x: Vec<f64> = (0..cfg.dim).map(|_| rng.random_range(-half..=half)).collect();
        let s = dot(&w_star, &x);
        let y = Label::of(s);
        let p = if cfg.reflect {
            if s.abs() < cfg.margin_gamma {
                continue;
            }
            LabeledPoint::new(x.iter().map(|v| y.sign() * v).collect(), Label::Pos)?
        } else {
            if s.abs() < cfg.margin_gamma {
                continue;
            }
            LabeledPoint::new(x, y)?
        };
        points.push(p);
    }
    if points.is_empty() {
        return Err(Error::AllPruned { gamma: cfg.margin_gamma });
    }
    Ok((Dataset::new(points)?, w_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_margin_keeps_everything() {
        let (d, w) = generate_synthetic(&SyntheticConfig::new(0.0, 1)).unwrap();
        assert_eq!(d.len(), 1000);
        assert!((crate::linalg::norm(&w) - 1.0).abs() < 1e-12);
        assert!(d.points().iter().all(|p| p.y() == Label::Pos));
    }

    #[test]
    fn pruning_postcondition() {
        let (d, w) = generate_synthetic(&SyntheticConfig::new(0.1, 2)).unwrap();
        assert!(d.len() >= 950);
        assert!(d.points().iter().all(|p| dot(&w, p.x()) >= 0.1));
    }

    #[test]
    fn unreflected_keeps_both_classes() {
        let cfg = SyntheticConfig { reflect: false, dim: 5, n_points: 300, ..SyntheticConfig::new(0.5, 3) };
        let (d, w) = generate_synthetic(&cfg).unwrap();
        assert!(d.points().iter().any(|p| p.y() == Label::Neg));
        assert!(d.points().iter().all(|p| p.y().sign() * dot(&w, p.x()) >= 0.5));
    }

    #[test]
    fn deterministic_and_all_pruned() {
        let a = generate_synthetic(&SyntheticConfig::new(0.2, 7)).unwrap();
        let b = generate_synthetic(&SyntheticConfig::new(0.2, 7)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(generate_synthetic(&SyntheticConfig::new(1e6, 7)), Err(Error::AllPruned { .. })));
        assert!(generate_synthetic(&SyntheticConfig::new(-1.0, 7)).is_err());
    }
}
