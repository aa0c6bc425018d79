//! Configuration, sweep runner and oracle suite behind the `mmnoma` binary.

pub mod config;
pub mod experiment;
pub mod validate;

pub use config::{load_config, parse_config, ConfigError, ExperimentSpec, Metric, SweepVariable};
pub use experiment::{emit_summary, run_experiment, write_csv, Row, Table, HEADER};
pub use validate::{run_all, Budget, CriterionReport};
