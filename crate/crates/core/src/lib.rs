//! Cutting-plane localization in the version space of linear classifiers.
//!
//! The version space of a separable dataset, intersected with the unit ball,
//! is a [`SphericalPolytope`]. This crate localizes a point inside it with a
//! Perceptron-driven cutting-plane loop ([`perceptron::localize`]), replays
//! the result from its compression set ([`compression`]), computes centroid
//! and Chebyshev query points ([`centers`]), runs pool-based active learning
//! ([`active`]), and checks the centroid partition bounds numerically
//! ([`geometry`]). [`harness`] drives the experiments.

pub mod active;
pub mod centers;
pub mod compression;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod perceptron;
pub mod seed;
pub mod versionspace;

pub use active::{run_active, select_query, ActiveConfig, ActiveRun, LabelOracle, Pool, QueryRecord, QueryRule, QueryScore};
pub use centers::{centroid_estimate, chebyshev_center, hit_and_run, CenterEstimate, CenterMethod, SamplerConfig};
pub use compression::{generalization_report, replay, CompressionScheme};
pub use error::{Error, Result};
pub use geometry::{estimate_volume, BodyStats, HyperCone, PartitionReport, VerifyConfig, VolumeEstimate};
pub use perceptron::{localize, perceptron_baseline, LocalizationTrace, OracleStrategy, StrategyKind};
pub use versionspace::{build_version_space, min_margin, Dataset, Halfspace, Label, LabeledPoint, SphericalPolytope};
