//! One pipeline run: normalize, embed, divide, initialize, train, predict,
//! score, and collect diagnostics.

use serde::{Deserialize, Serialize};

use crate::data::{
    embed_lags, fit_normalizer, plan_division, DivisionMethod, NormalizationPolicy, SeriesDataset,
    SplitSpec,
};
use crate::diagnostics::{
    autocorrelation, error_histogram, response_table, AcfResult, ErrorHistogram, ResponseRow,
    SplitLabel,
};
use crate::error::{BenchError, DataError};
use crate::metrics::{efficiency, MetricsBundle};
use crate::model::{init_network, InitScheme, NarNetwork};
use crate::train::{train, Algorithm, StopReason, TrainConfig, TrainReport};

/// Number of histogram bins in the diagnostics bundle.
pub const HISTOGRAM_BINS: usize = 20;

/// Maximum autocovariance lag in the diagnostics bundle.
pub const ACF_MAX_LAG: usize = 20;

/// Everything a scenario run needs besides the (algorithm, scenario, seed)
/// triple that varies across the benchmark grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub hidden: usize,
    pub lags: usize,
    pub division: DivisionMethod,
    pub normalization: NormalizationPolicy,
    pub init: InitScheme,
    /// Trainer hyperparameters; `algorithm` and `seed` inside are
    /// overridden per run.
    pub train: TrainConfig,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            hidden: 10,
            lags: 2,
            division: DivisionMethod::default(),
            normalization: NormalizationPolicy::default(),
            init: InitScheme::default(),
            train: TrainConfig::default(),
        }
    }
}

/// Sizes of the three index sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// Test-set row in the benchmark table column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub mse: f64,
    pub r: f64,
    pub mae: f64,
    pub mape_percent: f64,
    pub accuracy_percent: f64,
    pub efficiency: f64,
}

/// Scores and provenance of one (algorithm, scenario) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub algorithm: Algorithm,
    pub scenario: String,
    pub seed: u64,
    pub n_total: usize,
    pub counts: SplitCounts,
    pub train_metrics: MetricsBundle,
    pub val_metrics: MetricsBundle,
    pub test_metrics: MetricsBundle,
    /// n_total / train count.
    pub efficiency: f64,
    pub stop_reason: StopReason,
    pub epochs_run: usize,
    pub best_epoch: usize,
}

impl ScenarioResult {
    /// The six-column test-set view used by the report tables.
    pub fn test_row(&self) -> TestRow {
        TestRow {
            mse: self.test_metrics.mse,
            r: self.test_metrics.r,
            mae: self.test_metrics.mae,
            mape_percent: self.test_metrics.mape_percent,
            accuracy_percent: self.test_metrics.accuracy_percent,
            efficiency: self.efficiency,
        }
    }
}

/// Full output of [`run_scenario`]: the table row plus the training record,
/// the trained network, and the diagnostic artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub result: ScenarioResult,
    pub report: TrainReport,
    pub network: NarNetwork,
    pub response: Vec<ResponseRow>,
    pub histogram: ErrorHistogram,
    /// Autocovariance of the test-split errors in time order.
    pub test_acf: AcfResult,
}

/// Runs the whole pipeline for one (algorithm, scenario, seed) cell.
/// Deterministic in all inputs; errors carry the cell context.
pub fn run_scenario(
    dataset: &SeriesDataset,
    algorithm: Algorithm,
    scenario: &SplitSpec,
    settings: &RunSettings,
    seed: u64,
) -> Result<ScenarioRun, BenchError> {
    let ctx = format!("{algorithm} {}", scenario.name);
    let wrap = |e: crate::error::BenchErrorKind| BenchError::in_context(&ctx, e);

    let d = settings.lags;
    let n = dataset.len();
    let max_d = n.saturating_sub(30);
    if d == 0 || d > max_d {
        return Err(wrap(DataError::LagOutOfRange { d, max: max_d }.into()));
    }

    let n_targets = n - d;
    let plan = plan_division(n_targets, scenario, settings.division, seed)
        .map_err(|e| wrap(e.into()))?;
    let normalizer = fit_normalizer(dataset, settings.normalization, Some((&plan, d)))
        .map_err(|e| wrap(e.into()))?;
    let reg = embed_lags(dataset, d, &normalizer).map_err(|e| wrap(e.into()))?;

    let initial = init_network(d, settings.hidden, seed, settings.init, normalizer);
    let config = TrainConfig {
        algorithm,
        seed,
        ..settings.train.clone()
    };
    let report = train(&initial, &reg, &plan, &config).map_err(|e| wrap(e.into()))?;
    let network = report.final_network.clone();

    let score = |idx: &[usize]| -> Result<(MetricsBundle, Vec<f64>), BenchError> {
        let preds = network.predict_targets(&reg, idx).map_err(|e| wrap(e.into()))?;
        let targets: Vec<f64> = idx.iter().map(|&i| reg.targets_raw()[i]).collect();
        let bundle = MetricsBundle::compute(&targets, &preds).map_err(|e| wrap(e.into()))?;
        let errors: Vec<f64> = targets.iter().zip(&preds).map(|(t, p)| t - p).collect();
        Ok((bundle, errors))
    };
    let (train_metrics, train_errors) = score(&plan.train_idx)?;
    let (val_metrics, val_errors) = score(&plan.val_idx)?;
    let (test_metrics, test_errors) = score(&plan.test_idx)?;

    let result = ScenarioResult {
        algorithm,
        scenario: scenario.name.clone(),
        seed,
        n_total: n,
        counts: SplitCounts {
            train: plan.train_idx.len(),
            val: plan.val_idx.len(),
            test: plan.test_idx.len(),
        },
        train_metrics,
        val_metrics,
        test_metrics,
        efficiency: efficiency(n, plan.train_idx.len()).map_err(|e| wrap(e.into()))?,
        stop_reason: report.stop_reason,
        epochs_run: report.epochs_run,
        best_epoch: report.best_epoch,
    };

    // Diagnostics: pooled-range histogram, time-ordered response table,
    // and the autocovariance of the test errors.
    let histogram = error_histogram(&train_errors, &val_errors, &test_errors, HISTOGRAM_BINS)
        .map_err(|e| wrap(e.into()))?;

    let mut labels = vec![SplitLabel::Train; n_targets];
    for &i in &plan.val_idx {
        labels[i] = SplitLabel::Val;
    }
    for &i in &plan.test_idx {
        labels[i] = SplitLabel::Test;
    }
    let all_idx: Vec<usize> = (0..n_targets).collect();
    let outputs = network
        .predict_targets(&reg, &all_idx)
        .map_err(|e| wrap(e.into()))?;
    let times: Vec<f64> = all_idx
        .iter()
        .map(|&i| dataset.time_at(reg.target_time(i)))
        .collect();
    let response = response_table(&times, reg.targets_raw(), &outputs, &labels)
        .map_err(|e| wrap(e.into()))?;

    let max_lag = ACF_MAX_LAG.min(test_errors.len().saturating_sub(1));
    let test_acf =
        autocorrelation(&test_errors, max_lag, false).map_err(|e| wrap(e.into()))?;

    Ok(ScenarioRun {
        result,
        report,
        network,
        response,
        histogram,
        test_acf,
    })
}
