//! Experiment harness: configuration, sweeps, golden tables, traces and
//! CSV reports behind the `filter-lab` command line.

pub mod cli;
mod config;
mod golden;
mod report;
mod sweep;
mod trace;

pub use config::{HarnessConfig, OutputSection, SweepSection, OUTPUT_ENV_VAR};
pub use golden::{compute_tables, golden_diffs, render_table, GoldenDiff, Table, EXPECTED};
pub use report::{
    audit_row, cliff_witness_row, emit_report, emit_report_with, metrics_rows, schema_hash,
    summary_row, AuditRow, MetricsRow, ReportFiles, SummaryRow, AUDIT_COLUMNS, METRICS_COLUMNS,
    SUMMARY_COLUMNS,
};
pub use sweep::{
    cell_file_name, growth_fits, interactions_to_threshold, median_interactions, run_sweep,
    write_atomic, CellOutcome, GrowthFit, GrowthModel, StopSpec, SweepSpec,
};
pub use trace::{format_trace, trace_rows};
