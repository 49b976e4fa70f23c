//! Experiment layer: scenarios and configuration files, user sampling,
//! beam patterns, the Monte Carlo runner and scheme comparisons.

pub mod beam;
pub mod compare;
pub mod config;
pub mod experiment;
pub mod sampling;
pub mod scene;

pub use beam::{beam_pattern, focused_weights, BeamGrid, BeamGridSpec};
pub use compare::{compare_schemes, ComparisonReport};
pub use config::{load_config, parse_config, ExperimentConfig, Scenario};
pub use experiment::{run_experiment, write_results, Architecture, ExperimentResults, Scheme};
pub use sampling::{sample_users, stream_rng, UserDistribution};
pub use scene::{construction_report, Scene};
