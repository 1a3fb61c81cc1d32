//! Datasets and the constrained version space.
//!
//! The constrained version space of a dataset is the unit ball intersected
//! with one homogeneous halfspace `⟨a_n, w⟩ ≥ 0` per labeled point, where
//! `a_n = y_n x_n / ‖x_n‖`. Every localizer produced by the cutting-plane
//! loops in this crate is a [`SphericalPolytope`] of the same form.

pub mod io;

use crate::error::{Error, Result};
use crate::linalg::{dot, is_zero, norm};

/// Tolerance on unit norms and on the ball constraint.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Neg => -1.0,
            Label::Pos => 1.0,
        }
    }

    /// `sign(v)` with `sign(0) = +1`.
    pub fn of(v: f64) -> Label {
        if v < 0.0 {
            Label::Neg
        } else {
            Label::Pos
        }
    }

    pub fn from_i64(v: i64) -> Result<Label> {
        match v {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            other => Err(Error::InvalidLabel(other.to_string())),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Neg => -1,
            Label::Pos => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPoint {
    x: Vec<f64>,
    y: Label,
}

impl LabeledPoint {
    /// Rejects zero and non-finite feature vectors.
    pub fn new(x: Vec<f64>, y: Label) -> Result<Self> {
        if x.is_empty() || is_zero(&x) {
            return Err(Error::ZeroVector);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite feature value".into()));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> Label {
        self.y
    }

    /// `y · x`.
    pub fn signed(&self) -> Vec<f64> {
        let s = self.y.sign();
        self.x.iter().map(|v| s * v).collect()
    }
}

/// An ordered list of labeled points of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    points: Vec<LabeledPoint>,
    dim: usize,
}

impl Dataset {
    pub fn new(points: Vec<LabeledPoint>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyDataset)?.x.len();
        for p in &points {
            if p.x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.x.len() });
            }
        }
        Ok(Self { points, dim })
    }

    /// Convenience constructor from raw rows; labels must be ±1.
    pub fn from_rows(rows: Vec<(Vec<f64>, i64)>) -> Result<Self> {
        let points = rows
            .into_iter()
            .map(|(x, y)| LabeledPoint::new(x, Label::from_i64(y)?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &LabeledPoint {
        &self.points[i]
    }

    /// Sub-dataset made of `indices`, in the order given.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        let mut points = Vec::with_capacity(indices.len());
        for &i in indices {
            let p = self
                .points
                .get(i)
                .ok_or(Error::IndexOutOfRange { index: i, len: self.len() })?;
            points.push(p.clone());
        }
        Dataset::new(points)
    }
}

/// A homogeneous halfspace `{w : ⟨normal, w⟩ ≥ 0}` with a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    normal: Vec<f64>,
    source_index: Option<usize>,
}

impl Halfspace {
    /// Normalizes `normal`; rejects the zero vector.
    pub fn new(normal: &[f64], source_index: Option<usize>) -> Result<Self> {
        let normal = crate::linalg::normalized(normal).ok_or(Error::ZeroVector)?;
        Ok(Self { normal, source_index })
    }

    /// The cutting plane induced by a labeled point: normal `y x / ‖x‖`.
    pub fn from_point(p: &LabeledPoint, source_index: Option<usize>) -> Self {
        let n = norm(&p.x);
        let s = p.y.sign() / n;
        Self { normal: p.x.iter().map(|v| s * v).collect(), source_index }
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn source_index(&self) -> Option<usize> {
        self.source_index
    }

    pub fn margin(&self, w: &[f64]) -> f64 {
        dot(&self.normal, w)
    }

    pub fn admits(&self, w: &[f64]) -> bool {
        self.margin(w) >= 0.0
    }
}

/// `{w : ‖w‖ ≤ 1, ⟨a_i, w⟩ ≥ 0 ∀i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalPolytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
}

impl SphericalPolytope {
    /// The bare unit ball.
    pub fn ball(dim: usize) -> Self {
        Self { dim, halfspaces: Vec::new() }
    }

    pub fn with_halfspaces(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        let mut p = Self::ball(dim);
        for h in halfspaces {
            p.push(h)?;
        }
        Ok(p)
    }

    /// Builds a polytope from raw (not necessarily unit) normals.
    pub fn from_normals(dim: usize, normals: &[Vec<f64>]) -> Result<Self> {
        let hs = normals
            .iter()
            .map(|a| Halfspace::new(a, None))
            .collect::<Result<Vec<_>>>()?;
        Self::with_halfspaces(dim, hs)
    }

    /// Appends a cut; the set can only shrink.
    pub fn push(&mut self, h: Halfspace) -> Result<()> {
        if h.normal.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: h.normal.len() });
        }
        self.halfspaces.push(h);
        Ok(())
    }

    pub fn refined(&self, h: Halfspace) -> Result<Self> {
        let mut p = self.clone();
        p.push(h)?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    /// Membership with non-strict halfspace inequalities.
    pub fn contains(&self, w: &[f64]) -> Result<bool> {
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: w.len() });
        }
        Ok(self.contains_unchecked(w))
    }

    pub(crate) fn contains_unchecked(&self, w: &[f64]) -> bool {
        dot(w, w).sqrt() <= 1.0 + NORM_TOL && self.halfspaces.iter().all(|h| h.admits(w))
    }

    /// Indices (into `halfspaces`) of the constraints `w` violates.
    pub fn violated(&self, w: &[f64]) -> impl Iterator<Item = usize> + '_ {
        let w = w.to_vec();
        self.halfspaces
            .iter()
            .enumerate()
            .filter(move |(_, h)| !h.admits(&w))
            .map(|(i, _)| i)
    }
}

/// One halfspace per point, in dataset order.
pub fn build_version_space(dataset: &Dataset) -> Result<SphericalPolytope> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let halfspaces = dataset
        .points()
        .iter()
        .enumerate()
        .map(|(n, p)| Halfspace::from_point(p, Some(n)))
        .collect();
    Ok(SphericalPolytope { dim: dataset.dim(), halfspaces })
}

/// Minimum normalized margin `y⟨w, x⟩ / (‖w‖‖x‖)` and the first index attaining it.
pub fn min_margin(w: &[f64], dataset: &Dataset) -> Result<(f64, usize)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if w.len() != dataset.dim() {
        return Err(Error::DimensionMismatch { expected: dataset.dim(), found: w.len() });
    }
    let wn = norm(w);
    if wn == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut best = (f64::INFINITY, 0);
    for (n, p) in dataset.points().iter().enumerate() {
        let m = p.y.sign() * dot(w, &p.x) / (wn * norm(&p.x));
        if m < best.0 {
            best = (m, n);
        }
    }
    Ok(best)
}
