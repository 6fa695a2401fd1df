//! Benchmark harness: scenario runs, the algorithm-by-scenario grid,
//! best-row selection, and report emission.

mod matrix;
mod report;
mod scenario;
mod select;

pub use matrix::{derive_seed, run_matrix, GridCell};
pub use report::{
    emit_report, render_csv, render_json, render_markdown, BenchReport, DatasetDescriptor,
    ReportFormat, RunManifest, REPORT_SCHEMA_VERSION,
};
pub use scenario::{
    run_scenario, RunSettings, ScenarioResult, ScenarioRun, SplitCounts, TestRow, ACF_MAX_LAG,
    HISTOGRAM_BINS,
};
pub use select::{select_best, SelectionCriterion};
