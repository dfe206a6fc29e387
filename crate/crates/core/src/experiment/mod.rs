//! Declarative experiments: configuration, seeded multi-run execution,
//! aggregation and CSV output.

pub mod aggregate;
pub mod config;
pub mod csv;
pub mod runner;

pub use aggregate::{aggregate, aggregate_series, mean_and_std_error, smooth, AggregateCurve, CurvePoint};
pub use config::{
    load_config, parse_config, ConfigError, ExperimentConfig, Hyperparameters, MapSource, Representation,
    TaskConfig,
};
pub use csv::{export_csv, import_csv, parse_rows, render_rows, CsvRow, AGGREGATE_HEADER, RUNS_HEADER};
pub use runner::{run_experiment, run_single, EpisodeRecord, ExperimentError, RunRecord};
