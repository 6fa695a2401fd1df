//! Data pipeline: ingestion, synthesis, normalization, lag embedding, and
//! split planning.

mod embed;
mod load;
mod normalize;
mod series;
mod split;
mod synth;

pub use embed::{embed_lags, RegressionSet};
pub use load::{load_series, ColumnSelector};
pub use normalize::{NormalizationPolicy, Normalizer};
pub use series::{SeriesDataset, MIN_POINTS};
pub use split::{plan_division, DivisionMethod, DivisionPlan, SplitSpec, SCENARIO_FRACTIONS};
pub use synth::{generate_synthetic, SyntheticProfile, AR1_COEFF};

use crate::error::DataError;

/// Fits a normalizer according to `policy`: either on the whole series or
/// on the raw values at the training target positions of `plan` (target
/// `i` sits at series position `d + i`).
pub fn fit_normalizer(
    series: &SeriesDataset,
    policy: NormalizationPolicy,
    plan: Option<(&DivisionPlan, usize)>,
) -> Result<Normalizer, DataError> {
    match (policy, plan) {
        (NormalizationPolicy::FullSeries, _) | (NormalizationPolicy::TrainOnly, None) => {
            Normalizer::fit(series.values())
        }
        (NormalizationPolicy::TrainOnly, Some((plan, d))) => {
            let values: Vec<f64> = plan
                .train_idx
                .iter()
                .map(|&i| series.values()[d + i])
                .collect();
            Normalizer::fit(&values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn train_only_policy_ignores_test_extremes() {
        // Put the series extremes in the tail so a contiguous-block train
        // set never sees them.
        let mut values: Vec<f64> = (0..100).map(|i| 70.0 + (i % 10) as f64).collect();
        values[95] = 200.0;
        values[96] = 10.0;
        let ds = SeriesDataset::new(values, None, "tail-extremes").unwrap();
        let spec = SplitSpec::new("s", 0.6, 0.2, 0.2).unwrap();
        let plan = plan_division(98, &spec, DivisionMethod::ContiguousBlock, 0).unwrap();

        let full = fit_normalizer(&ds, NormalizationPolicy::FullSeries, Some((&plan, 2))).unwrap();
        let train = fit_normalizer(&ds, NormalizationPolicy::TrainOnly, Some((&plan, 2))).unwrap();
        assert_eq!(full.x_max, 200.0);
        assert_eq!(full.x_min, 10.0);
        assert!(train.x_max < 200.0);
        assert!(train.x_min > 10.0);
    }
}
