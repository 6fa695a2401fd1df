//! Report assembly and rendering: CSV for machines, JSON with an embedded
//! manifest for reproduction, markdown for reading.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::matrix::GridCell;
use crate::bench::scenario::{RunSettings, ScenarioResult};
use crate::bench::select::{select_best, SelectionCriterion};
use crate::data::{SplitSpec, SyntheticProfile};
use crate::error::BenchError;
use crate::train::Algorithm;

/// Version of the JSON report schema.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Where the series came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetDescriptor {
    Csv {
        path: String,
        column: String,
        n: usize,
        label: String,
    },
    Synthetic {
        n: usize,
        seed: u64,
        profile: SyntheticProfile,
    },
}

/// Everything needed to reproduce a benchmark bit for bit, plus tool
/// version and an optional wall-clock stamp (left out of determinism
/// comparisons).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub dataset: DatasetDescriptor,
    pub master_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub scenarios: Vec<SplitSpec>,
    pub settings: RunSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

impl RunManifest {
    pub fn new(
        dataset: DatasetDescriptor,
        master_seed: u64,
        algorithms: Vec<Algorithm>,
        scenarios: Vec<SplitSpec>,
        settings: RunSettings,
    ) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            dataset,
            master_seed,
            algorithms,
            scenarios,
            settings,
            generated_at: None,
        }
    }
}

/// A rendered-ready benchmark: manifest, grid cells, and the best row per
/// algorithm under the chosen criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub manifest: RunManifest,
    pub criterion: SelectionCriterion,
    pub cells: Vec<GridCell>,
    pub best: Vec<ScenarioResult>,
}

impl BenchReport {
    /// Validates row-level consistency and resolves the best rows. A grid
    /// whose cells all failed still renders (with an empty best list).
    pub fn new(
        manifest: RunManifest,
        cells: Vec<GridCell>,
        criterion: SelectionCriterion,
    ) -> Result<Self, BenchError> {
        for cell in &cells {
            if let Some(row) = &cell.result {
                validate_row(row)?;
            }
        }
        let best = match select_best(&cells, criterion) {
            Ok(rows) => rows.into_iter().cloned().collect(),
            Err(BenchError::EmptyTable) => Vec::new(),
            Err(e) => return Err(e),
        };
        Ok(Self {
            manifest,
            criterion,
            cells,
            best,
        })
    }
}

/// Re-checks the identities every emitted row must satisfy: accuracy is
/// exactly 100 - MAPE and efficiency is exactly n_total / train count.
fn validate_row(row: &ScenarioResult) -> Result<(), BenchError> {
    let bad = |detail: String| {
        Err(BenchError::InconsistentRow {
            algorithm: row.algorithm.to_string(),
            scenario: row.scenario.clone(),
            detail,
        })
    };
    for bundle in [&row.train_metrics, &row.val_metrics, &row.test_metrics] {
        if bundle.accuracy_percent != 100.0 - bundle.mape_percent {
            return bad(format!(
                "accuracy {} != 100 - mape {}",
                bundle.accuracy_percent, bundle.mape_percent
            ));
        }
    }
    let expected = row.n_total as f64 / row.counts.train as f64;
    if row.efficiency != expected {
        return bad(format!(
            "efficiency {} != {} / {}",
            row.efficiency, row.n_total, row.counts.train
        ));
    }
    Ok(())
}

/// Output format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(format!("unknown format '{other}' (expected csv, json, or markdown)")),
        }
    }
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "md",
        }
    }
}

/// JSON rendering: pretty-printed, stable field order, trailing newline.
/// Byte-reproducible for a fixed manifest when `generated_at` is unset.
pub fn render_json(report: &BenchReport) -> Result<String, BenchError> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| BenchError::Io {
        path: "<memory>".into(),
        message: e.to_string(),
    })?;
    text.push('\n');
    Ok(text)
}

/// CSV rendering: one row per grid cell, full float precision, test-set
/// metric columns in table order (MSE, R, MAE, MAPE, Accuracy, Efficiency).
pub fn render_csv(report: &BenchReport) -> String {
    let mut out = String::from(
        "algorithm,scenario,seed,n_total,train_count,val_count,test_count,\
         mse,r,mae,mape_percent,accuracy_percent,efficiency,\
         stop_reason,epochs_run,best_epoch,error\n",
    );
    for cell in &report.cells {
        match (&cell.result, &cell.error) {
            (Some(row), _) => {
                let t = row.test_row();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},\n",
                    row.algorithm,
                    row.scenario,
                    row.seed,
                    row.n_total,
                    row.counts.train,
                    row.counts.val,
                    row.counts.test,
                    t.mse,
                    t.r,
                    t.mae,
                    t.mape_percent,
                    t.accuracy_percent,
                    t.efficiency,
                    row.stop_reason,
                    row.epochs_run,
                    row.best_epoch,
                ));
            }
            (None, Some(error)) => {
                out.push_str(&format!(
                    "{},{},{},,,,,,,,,,,,,,\"{}\"\n",
                    cell.algorithm,
                    cell.scenario,
                    cell.seed,
                    error.replace('"', "'"),
                ));
            }
            (None, None) => {}
        }
    }
    out
}

fn md_metric_cells(row: &ScenarioResult) -> String {
    let t = row.test_row();
    format!(
        "{:.2} | {:.4} | {:.2} | {:.2}% | {:.2}% | {:.2}",
        t.mse, t.r, t.mae, t.mape_percent, t.accuracy_percent, t.efficiency
    )
}

/// Markdown rendering: one table per algorithm in scenario order with the
/// columns MSE, R, MAE, MAPE, Accuracy, Efficiency, then a comparison
/// table of each algorithm's best row ordered R, MSE, MAE, MAPE, Acc, Eff.
pub fn render_markdown(report: &BenchReport) -> String {
    let mut out = String::from("# Benchmark results\n");
    out.push_str(&format!(
        "\nDataset: {} | master seed {}\n",
        match &report.manifest.dataset {
            DatasetDescriptor::Csv { label, n, .. } => format!("{label} (n = {n})"),
            DatasetDescriptor::Synthetic { n, seed, .. } =>
                format!("synthetic (n = {n}, seed {seed})"),
        },
        report.manifest.master_seed
    ));

    for &algorithm in &report.manifest.algorithms {
        let rows: Vec<&GridCell> = report
            .cells
            .iter()
            .filter(|c| c.algorithm == algorithm)
            .collect();
        if rows.is_empty() {
            continue;
        }
        out.push_str(&format!("\n## {} testing data results\n\n", algorithm.long_name()));
        out.push_str("| Scenario | MSE | R | MAE | MAPE | Accuracy | Efficiency |\n");
        out.push_str("|---|---|---|---|---|---|---|\n");
        for cell in rows {
            match (&cell.result, &cell.error) {
                (Some(row), _) => {
                    out.push_str(&format!("| {} | {} |\n", row.scenario, md_metric_cells(row)));
                }
                (None, Some(error)) => {
                    out.push_str(&format!("| {} | failed: {} ||||||\n", cell.scenario, error));
                }
                (None, None) => {}
            }
        }
    }

    if !report.best.is_empty() {
        out.push_str(&format!(
            "\n## Best scenario per algorithm (criterion: {})\n\n",
            report.criterion
        ));
        out.push_str("| Algorithm | R | MSE | MAE | MAPE | Acc | Eff |\n");
        out.push_str("|---|---|---|---|---|---|---|\n");
        for row in &report.best {
            let t = row.test_row();
            out.push_str(&format!(
                "| {} ({}) | {:.4} | {:.2} | {:.2} | {:.2}% | {:.2}% | {:.2} |\n",
                row.algorithm.long_name(),
                row.scenario,
                t.r,
                t.mse,
                t.mae,
                t.mape_percent,
                t.accuracy_percent,
                t.efficiency
            ));
        }
    }
    out
}

/// Renders `report` in `format` and writes it to `path`.
pub fn emit_report(
    report: &BenchReport,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<(), BenchError> {
    let path = path.as_ref();
    let text = match format {
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => render_json(report)?,
        ReportFormat::Markdown => render_markdown(report),
    };
    std::fs::write(path, text).map_err(|e| BenchError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
