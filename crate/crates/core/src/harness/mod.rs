//! Experiment drivers: configuration, synthetic data, the four sweeps and
//! their CSV output.

pub mod config;
pub mod experiments;
pub mod synthetic;
pub mod table;

pub use config::Config;
pub use experiments::{run_experiment, ExperimentKind, ExperimentSpec};
pub use synthetic::{generate_synthetic, SyntheticConfig};
pub use table::Table;
