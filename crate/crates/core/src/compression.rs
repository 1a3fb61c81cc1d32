//! Localization traces viewed as sample compression schemes.
//!
//! Re-running [`localize`] on the picked cutting planes alone re-derives the
//! predictor bit-for-bit when the oracle strategy is a deterministic function
//! of the localizer and the query point.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::perceptron::{default_update_budget, localize, LocalizationTrace, OracleStrategy, StrategyKind};
use crate::versionspace::{Dataset, Label};

const HEADER: &str = "cutplane-scheme v1";

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionScheme {
    pub indices: Vec<usize>,
    pub strategy: OracleStrategy,
    pub predictor: Vec<f64>,
}

impl CompressionScheme {
    pub fn from_trace(trace: &LocalizationTrace, strategy: OracleStrategy) -> Self {
        Self { indices: trace.plane_indices.clone(), strategy, predictor: trace.w_final.clone() }
    }

    /// The scheme truncated to its first `k` planes. The predictor is left
    /// as-is; compare replays against the trace's query points instead.
    pub fn prefix(&self, k: usize) -> Self {
        Self { indices: self.indices[..k.min(self.indices.len())].to_vec(), ..self.clone() }
    }

    /// Line-oriented text form. Floats use the shortest representation that
    /// parses back to the same bits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{HEADER}").unwrap();
        writeln!(s, "strategy {}", self.strategy.name()).unwrap();
        writeln!(s, "seed {}", self.strategy.seed).unwrap();
        writeln!(s, "indices {}", self.indices.len()).unwrap();
        for i in &self.indices {
            writeln!(s, "{i}").unwrap();
        }
        writeln!(s, "predictor {}", self.predictor.len()).unwrap();
        for v in &self.predictor {
            writeln!(s, "{v:?}").unwrap();
        }
        s
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim()))
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("unexpected end of input, expected {what}") })
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (ln, l) = self.next(key)?;
        let rest = l
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| Error::Parse { line: ln, msg: format!("expected `{key} <value>`") })?;
        Ok((ln, rest.trim()))
    }

    fn value<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let (ln, v) = self.field(key)?;
        v.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad {key} {v:?}") })
    }

    fn list<T: FromStr>(&mut self, what: &str, count: usize) -> Result<Vec<T>> {
        (0..count)
            .map(|_| {
                let (ln, l) = self.next(what)?;
                l.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad {what} {l:?}") })
            })
            .collect()
    }
}

impl FromStr for CompressionScheme {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = Lines { inner: text.lines().enumerate() };
        let (ln, header) = lines.next("header")?;
        if header != HEADER {
            return Err(Error::Parse { line: ln, msg: format!("expected {HEADER:?}") });
        }
        let (_, kind) = lines.field("strategy")?;
        let kind: StrategyKind = kind.parse()?;
        let seed: u64 = lines.value("seed")?;
        let count: usize = lines.value("indices")?;
        let indices = lines.list("index", count)?;
        let count: usize = lines.value("predictor")?;
        let predictor = lines.list("coordinate", count)?;
        Ok(Self { indices, strategy: OracleStrategy { kind, seed }, predictor })
    }
}

/// Re-runs localization on the compression set alone and returns its predictor.
///
/// Repeated indices are dropped and the surviving points keep their dataset order.
pub fn replay(dataset: &Dataset, scheme: &CompressionScheme) -> Result<Vec<f64>> {
    for &i in &scheme.indices {
        if i >= dataset.len() {
            return Err(Error::IndexOutOfRange { index: i, len: dataset.len() });
        }
    }
    let mut keep = scheme.indices.clone();
    keep.sort_unstable();
    keep.dedup();
    let reduced = dataset.select(&keep)?;
    Ok(localize(&reduced, scheme.strategy, default_update_budget())?.w_final)
}

/// Indicative compression bound `errors/(N-|S|) + sqrt(1/(N-|S|))`.
///
/// The hidden constant is fixed to 1, so the value is not a certified bound.
pub fn generalization_report(n_total: usize, scheme_size: usize, train_errors: usize) -> Result<f64> {
    if scheme_size >= n_total {
        return Err(Error::DegenerateDenominator { n_total, scheme_size });
    }
    let rest = (n_total - scheme_size) as f64;
    Ok(train_errors as f64 / rest + (1.0 / rest).sqrt())
}

/// Training mistakes of `sign(⟨w, x⟩)` with `sign(0) = +1`.
pub fn train_errors(dataset: &Dataset, w: &[f64]) -> usize {
    dataset
        .points()
        .iter()
        .filter(|p| Label::of(dot(w, p.x())) != p.y())
        .count()
}
