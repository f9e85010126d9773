//! Experiment runner behind the `dca` binary: simulate, interpolate,
//! gradient-check and train from a JSON configuration.

mod config;
mod run;

pub use config::{
    ExperimentConfig, GradcheckConfig, InitialSource, Mode, OptimizerConfig, OutputConfig, RuleSource,
    TableEntry, TargetConfig, TopologyConfig,
};
pub use run::{derive_seed, run_experiment, RunReport};
