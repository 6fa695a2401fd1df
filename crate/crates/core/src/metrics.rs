//! The six evaluation metrics, computed in original units: MSE, MAE,
//! MAPE, correlation (with R^2, RSS, TSS), accuracy = 100 - MAPE, and the
//! data-reduction efficiency n_total / n_train.

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;

fn check_pair(targets: &[f64], predictions: &[f64]) -> Result<(), MetricsError> {
    if targets.len() != predictions.len() {
        return Err(MetricsError::LengthMismatch {
            targets: targets.len(),
            predictions: predictions.len(),
        });
    }
    if targets.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Mean squared error: (1/n) * sum (Y_i - Yhat_i)^2.
pub fn mse(targets: &[f64], predictions: &[f64]) -> Result<f64, MetricsError> {
    check_pair(targets, predictions)?;
    let rss: f64 = targets
        .iter()
        .zip(predictions)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    Ok(rss / targets.len() as f64)
}

/// Mean absolute error: sum |Y_i - Yhat_i| / n.
pub fn mae(targets: &[f64], predictions: &[f64]) -> Result<f64, MetricsError> {
    check_pair(targets, predictions)?;
    let total: f64 = targets
        .iter()
        .zip(predictions)
        .map(|(t, p)| (t - p).abs())
        .sum();
    Ok(total / targets.len() as f64)
}

/// Mean absolute percentage error, in percent. Errors out when any target
/// is zero.
pub fn mape(targets: &[f64], predictions: &[f64]) -> Result<f64, MetricsError> {
    check_pair(targets, predictions)?;
    let mut total = 0.0;
    for (i, (t, p)) in targets.iter().zip(predictions).enumerate() {
        if *t == 0.0 {
            return Err(MetricsError::ZeroTarget(i));
        }
        total += ((t - p) / t).abs();
    }
    Ok(total / targets.len() as f64 * 100.0)
}

/// Correlation block: Pearson r, R^2 = 1 - RSS/TSS, and the two sums of
/// squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RValue {
    pub r: f64,
    pub r_squared: f64,
    pub rss: f64,
    pub tss: f64,
}

/// Pearson correlation between targets and predictions together with the
/// residual and total sums of squares.
pub fn r_value(targets: &[f64], predictions: &[f64]) -> Result<RValue, MetricsError> {
    check_pair(targets, predictions)?;
    let n = targets.len() as f64;
    let t_mean = targets.iter().sum::<f64>() / n;
    let p_mean = predictions.iter().sum::<f64>() / n;

    let mut cov = 0.0;
    let mut t_var = 0.0;
    let mut p_var = 0.0;
    let mut rss = 0.0;
    for (t, p) in targets.iter().zip(predictions) {
        cov += (t - t_mean) * (p - p_mean);
        t_var += (t - t_mean) * (t - t_mean);
        p_var += (p - p_mean) * (p - p_mean);
        rss += (t - p) * (t - p);
    }
    if t_var == 0.0 {
        return Err(MetricsError::ConstantTargets);
    }
    if p_var == 0.0 {
        return Err(MetricsError::ConstantPredictions);
    }
    let tss = t_var;
    Ok(RValue {
        r: cov / (t_var.sqrt() * p_var.sqrt()),
        r_squared: 1.0 - rss / tss,
        rss,
        tss,
    })
}

/// Accuracy in percentage points: 100 - MAPE.
pub fn accuracy(mape_percent: f64) -> f64 {
    100.0 - mape_percent
}

/// Data-reduction ratio: total points divided by training points.
pub fn efficiency(n_total: usize, n_train: usize) -> Result<f64, MetricsError> {
    if n_train == 0 {
        return Err(MetricsError::ZeroTrainCount);
    }
    if n_train > n_total {
        return Err(MetricsError::TrainExceedsTotal { n_train, n_total });
    }
    Ok(n_total as f64 / n_train as f64)
}

/// All per-split metrics in one bundle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub mse: f64,
    pub mae: f64,
    pub mape_percent: f64,
    pub r: f64,
    pub r_squared: f64,
    pub rss: f64,
    pub tss: f64,
    pub accuracy_percent: f64,
    pub sample_count: usize,
}

impl MetricsBundle {
    /// Computes every metric on a (targets, predictions) pair in original
    /// units. `mse` is derived from the same `rss` accumulation, so
    /// `mse == rss / n` holds exactly, and `accuracy = 100 - mape` by the
    /// same float subtraction.
    pub fn compute(targets: &[f64], predictions: &[f64]) -> Result<Self, MetricsError> {
        let rv = r_value(targets, predictions)?;
        let mape_percent = mape(targets, predictions)?;
        Ok(Self {
            mse: rv.rss / targets.len() as f64,
            mae: mae(targets, predictions)?,
            mape_percent,
            r: rv.r,
            r_squared: rv.r_squared,
            rss: rv.rss,
            tss: rv.tss,
            accuracy_percent: accuracy(mape_percent),
            sample_count: targets.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mse_hand_example() {
        let m = mse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap();
        assert!((m - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn mae_hand_example() {
        let m = mae(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap();
        assert!((m - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mape_hand_example() {
        let m = mape(&[100.0, 200.0], &[90.0, 210.0]).unwrap();
        assert!((m - 7.5).abs() < 1e-12);
        assert_eq!(mape(&[3.0, 3.0], &[3.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn mape_zero_target_names_index() {
        let err = mape(&[100.0, 0.0, 50.0], &[90.0, 1.0, 49.0]).unwrap_err();
        assert!(matches!(err, MetricsError::ZeroTarget(1)));
    }

    #[test]
    fn perfect_predictions_have_unit_correlation() {
        let t = [61.0, 75.5, 58.2, 90.0];
        let rv = r_value(&t, &t).unwrap();
        assert!((rv.r - 1.0).abs() < 1e-12);
        assert!((rv.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(rv.rss, 0.0);
    }

    #[test]
    fn affine_predictions_keep_r_but_not_r_squared() {
        let t = [61.0, 75.5, 58.2, 90.0, 66.3];
        let p: Vec<f64> = t.iter().map(|x| 1.5 * x + 7.0).collect();
        let rv = r_value(&t, &p).unwrap();
        assert!((rv.r - 1.0).abs() < 1e-12);
        assert!(rv.r_squared < 1.0);
    }

    #[test]
    fn constant_inputs_rejected() {
        assert!(matches!(
            r_value(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]),
            Err(MetricsError::ConstantTargets)
        ));
        assert!(matches!(
            r_value(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]),
            Err(MetricsError::ConstantPredictions)
        ));
    }

    #[test]
    fn accuracy_is_complement_of_mape() {
        assert_eq!(accuracy(20.83), 100.0 - 20.83);
        assert_eq!(accuracy(0.0), 100.0);
        assert_eq!(accuracy(27.02), 100.0 - 27.02);
    }

    #[test]
    fn efficiency_reproduces_reduction_ratios() {
        assert!((efficiency(6312, 1894).unwrap() - 3.33).abs() < 0.01);
        assert_eq!(efficiency(6312, 3156).unwrap(), 2.0);
        assert_eq!(efficiency(500, 500).unwrap(), 1.0);
        assert!(matches!(
            efficiency(100, 0),
            Err(MetricsError::ZeroTrainCount)
        ));
        assert!(matches!(
            efficiency(10, 20),
            Err(MetricsError::TrainExceedsTotal { .. })
        ));
    }

    #[test]
    fn length_mismatch_and_empty_rejected() {
        assert!(matches!(
            mse(&[1.0], &[1.0, 2.0]),
            Err(MetricsError::LengthMismatch { .. })
        ));
        assert!(matches!(mse(&[], &[]), Err(MetricsError::Empty)));
    }

    /// Brute-force re-implementations used as the independent oracle.
    mod oracle {
        pub fn mse(t: &[f64], p: &[f64]) -> f64 {
            let mut s = 0.0;
            for i in 0..t.len() {
                let d = t[i] - p[i];
                s += d * d;
            }
            s / t.len() as f64
        }

        pub fn mae(t: &[f64], p: &[f64]) -> f64 {
            let mut s = 0.0;
            for i in 0..t.len() {
                s += (t[i] - p[i]).abs();
            }
            s / t.len() as f64
        }

        pub fn mape(t: &[f64], p: &[f64]) -> f64 {
            let mut s = 0.0;
            for i in 0..t.len() {
                s += ((t[i] - p[i]) / t[i]).abs();
            }
            s / t.len() as f64 * 100.0
        }

        pub fn pearson(t: &[f64], p: &[f64]) -> f64 {
            let n = t.len() as f64;
            let mt = t.iter().sum::<f64>() / n;
            let mp = p.iter().sum::<f64>() / n;
            let mut num = 0.0;
            let mut dt = 0.0;
            let mut dp = 0.0;
            for i in 0..t.len() {
                num += (t[i] - mt) * (p[i] - mp);
                dt += (t[i] - mt) * (t[i] - mt);
                dp += (p[i] - mp) * (p[i] - mp);
            }
            num / (dt.sqrt() * dp.sqrt())
        }

        pub fn r_squared(t: &[f64], p: &[f64]) -> f64 {
            let n = t.len() as f64;
            let mt = t.iter().sum::<f64>() / n;
            let mut rss = 0.0;
            let mut tss = 0.0;
            for i in 0..t.len() {
                rss += (t[i] - p[i]) * (t[i] - p[i]);
                tss += (t[i] - mt) * (t[i] - mt);
            }
            1.0 - rss / tss
        }
    }

    fn random_pair(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let n = rng.random_range(2..60);
        let t: Vec<f64> = (0..n).map(|_| rng.random_range(30.0..180.0)).collect();
        let p: Vec<f64> = t
            .iter()
            .map(|x| x + rng.random_range(-5.0..5.0))
            .collect();
        (t, p)
    }

    #[test]
    fn agrees_with_brute_force_oracle_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let (t, p) = random_pair(&mut rng);
            let bundle = MetricsBundle::compute(&t, &p).unwrap();
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            assert!(rel(bundle.mse, oracle::mse(&t, &p)) < 1e-12);
            assert!(rel(bundle.mae, oracle::mae(&t, &p)) < 1e-12);
            assert!(rel(bundle.mape_percent, oracle::mape(&t, &p)) < 1e-12);
            assert!(rel(bundle.r, oracle::pearson(&t, &p)) < 1e-12);
            assert!((bundle.r_squared - oracle::r_squared(&t, &p)).abs() < 1e-12);
            assert_eq!(bundle.accuracy_percent + bundle.mape_percent, 100.0);
            // Jensen: mean(|e|)^2 <= mean(e^2).
            assert!(bundle.mae * bundle.mae <= bundle.mse * (1.0 + 1e-15));
            // mse is rss/n by construction.
            assert_eq!(bundle.mse, bundle.rss / t.len() as f64);
        }
    }

    #[test]
    fn r_is_invariant_under_positive_affine_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (t, p) = random_pair(&mut rng);
            let scaled: Vec<f64> = p.iter().map(|x| 2.5 * x + 11.0).collect();
            let base = r_value(&t, &p).unwrap();
            let after = r_value(&t, &scaled).unwrap();
            assert!((base.r - after.r).abs() < 1e-12);
            assert!((base.r_squared - after.r_squared).abs() > 0.0 || base.rss == after.rss);
        }
    }
}
