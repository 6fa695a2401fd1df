//! Min-max normalization onto [-1, 1].

use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Which values the normalizer is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationPolicy {
    /// Fit on the whole series (the toolbox-style default).
    #[default]
    FullSeries,
    /// Fit on training targets only, for leakage-sensitive studies.
    TrainOnly,
}

/// Linear map sending the fitted range [x_min, x_max] onto [-1, +1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub x_min: f64,
    pub x_max: f64,
}

impl Normalizer {
    /// Fits the range over `values`. Errors when all values coincide.
    pub fn fit(values: &[f64]) -> Result<Self, DataError> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if values.is_empty() || !(min < max) {
            return Err(DataError::ConstantSeries(if values.is_empty() {
                f64::NAN
            } else {
                min
            }));
        }
        Ok(Self { x_min: min, x_max: max })
    }

    pub fn apply(&self, x: f64) -> f64 {
        -1.0 + 2.0 * (x - self.x_min) / (self.x_max - self.x_min)
    }

    pub fn invert(&self, y: f64) -> f64 {
        self.x_min + (y + 1.0) * (self.x_max - self.x_min) / 2.0
    }

    /// Half the fitted span; the slope of `invert`, useful for converting
    /// normalized-domain squared errors into original units.
    pub fn half_range(&self) -> f64 {
        (self.x_max - self.x_min) / 2.0
    }
}
