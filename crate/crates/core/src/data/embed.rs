//! Lag embedding: turn a series into (lagged inputs, one-step-ahead target)
//! pairs in the normalized domain.

use nalgebra::{DMatrix, DVector};

use crate::data::normalize::Normalizer;
use crate::data::series::SeriesDataset;
use crate::error::DataError;

/// Lag-embedded regression problem. Row `i` predicts the value at time
/// `d + i` from the `d` values immediately before it; column 0 is the most
/// recent lag. Inputs and targets are normalized; the raw targets are kept
/// alongside so metrics can be computed in original units without a
/// round trip.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSet {
    inputs: DMatrix<f64>,
    targets: DVector<f64>,
    targets_raw: Vec<f64>,
    d: usize,
    normalizer: Normalizer,
}

impl RegressionSet {
    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    /// Normalized targets.
    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    /// Targets in original units.
    pub fn targets_raw(&self) -> &[f64] {
        &self.targets_raw
    }

    pub fn lag_count(&self) -> usize {
        self.d
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    /// Normalized input row `i` as a slice (row-major storage is avoided by
    /// nalgebra, so this copies into a small buffer).
    pub fn input_row(&self, i: usize) -> Vec<f64> {
        (0..self.d).map(|k| self.inputs[(i, k)]).collect()
    }

    /// Time index of target `i` within the original series.
    pub fn target_time(&self, i: usize) -> usize {
        self.d + i
    }
}

/// Embeds `series` with `d` lags under the given normalizer.
///
/// Requires `1 <= d <= n - 30` so that at least thirty targets remain for
/// the three-way split.
pub fn embed_lags(
    series: &SeriesDataset,
    d: usize,
    normalizer: &Normalizer,
) -> Result<RegressionSet, DataError> {
    let n = series.len();
    let max_d = n.saturating_sub(30);
    if d == 0 || d > max_d {
        return Err(DataError::LagOutOfRange { d, max: max_d });
    }

    let values = series.values();
    let n_targets = n - d;
    let inputs = DMatrix::from_fn(n_targets, d, |i, k| {
        // target time t = d + i; column k holds the value at t - 1 - k
        normalizer.apply(values[d + i - 1 - k])
    });
    let targets = DVector::from_fn(n_targets, |i, _| normalizer.apply(values[d + i]));
    let targets_raw = values[d..].to_vec();

    Ok(RegressionSet {
        inputs,
        targets,
        targets_raw,
        d,
        normalizer: *normalizer,
    })
}
