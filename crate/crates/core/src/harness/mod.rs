//! Configuration, experiment drivers and CSV output.

pub mod config;
pub mod experiments;
pub mod table;

pub use config::{
    ExperimentConfig, ExperimentKind, OptimizerConfig, ProblemConfig, ProblemKind, SweepConfig,
};
pub use experiments::*;
pub use table::{emit_csv, parse_csv, trace_from_table, trace_table, Table};
