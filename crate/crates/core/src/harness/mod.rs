//! Experiment orchestration: configuration, seeded runs, CSV logs and plots.

pub mod config;
pub mod experiment;
pub mod log;
pub mod plot;

pub use config::{config_from_text, parse_config, Algo, EnvKind, ExperimentConfig};
pub use experiment::{run_experiment, run_seed, SeedRun, Summary};
pub use log::{read_csv, LogTable, MetricRow};
pub use plot::{plot, PlotOptions};
