//! Validated univariate time series.

use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Minimum number of points a dataset must carry: one lag plus thirty
/// targets, the smallest series that can still be split three ways.
pub const MIN_POINTS: usize = 31;

/// A univariate time series in original units (e.g. heart rate in
/// beats/min), optionally paired with strictly increasing timestamps
/// in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDataset {
    values: Vec<f64>,
    timestamps: Option<Vec<f64>>,
    source_label: String,
}

impl SeriesDataset {
    /// Validates and wraps a series: all values finite, length at least
    /// [`MIN_POINTS`], timestamps (when present) matching in length and
    /// strictly increasing.
    pub fn new(
        values: Vec<f64>,
        timestamps: Option<Vec<f64>>,
        source_label: impl Into<String>,
    ) -> Result<Self, DataError> {
        if values.len() < MIN_POINTS {
            return Err(DataError::TooFewPoints {
                got: values.len(),
                min: MIN_POINTS,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite(i));
        }
        if let Some(ts) = &timestamps {
            if ts.len() != values.len() {
                return Err(DataError::TimestampLength {
                    got: ts.len(),
                    expected: values.len(),
                });
            }
            if let Some(i) = ts.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFinite(i));
            }
            for i in 1..ts.len() {
                if ts[i] <= ts[i - 1] {
                    return Err(DataError::NonIncreasingTimestamps(i));
                }
            }
        }
        Ok(Self {
            values,
            timestamps,
            source_label: source_label.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Timestamp of point `i`, falling back to the sample index when the
    /// series carries no explicit time axis.
    pub fn time_at(&self, i: usize) -> f64 {
        match &self.timestamps {
            Some(ts) => ts[i],
            None => i as f64,
        }
    }
}
