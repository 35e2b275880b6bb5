//! Monte Carlo experiments: configuration, parallel runs, statistics,
//! verdicts against predicted behaviour, and persisted artifacts.

mod config;
mod emit;
mod run;
mod verdict;

pub use config::{CriterionSpec, ExperimentConfig, Prediction, MIN_HORIZON};
pub use emit::{
    emit_report, persist_run, render, ReportFormat, CONFIG_JSON, CRITERIA_JSON, CSV_HEADER,
    HITS_JSONL, MANIFEST_JSON, REPORT_JSON, SUMMARY_CSV, SUMMARY_MD,
};
pub use run::{
    checkpoint_stats, env_threads, evaluate_criterion, expectation, record_digest, record_line,
    run_experiment, run_experiment_with, CheckpointStats, Expectation, ExperimentReport,
    MassSource, RunContext, RunInfo, DEFAULT_CRITERION_HORIZON, THREADS_ENV,
};
pub use verdict::{aggregate_verdict, AggregateOutcome, Bound, Margin, Outcome};
