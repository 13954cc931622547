//! Batch experiments: configuration, the suite runner and report export.

mod config;
mod export;
mod suite;

pub use config::{
    load_config, parse_config, BackendSpec, BoundSpec, Experiment, ExperimentConfig,
    FullFactorialSpec, GroupingSpec, MorrisSpec, Nsga2Spec, OptionRef, SpaceSpec,
};
pub use export::{export_report, file_stem, read_report, write_pareto_csv, REPORT_FILE};
pub use suite::{
    run_suite, NsgaOutcome, NsgaRunRow, OracleOutcome, OracleStatus, RunKind, SequentialRow,
    StageSummary, SuiteParts, SuiteReport,
};
