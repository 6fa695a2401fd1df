//! Synthetic heart-rate-like series: baseline + slow sinusoidal drift +
//! AR(1) noise, clamped to stay positive.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::series::SeriesDataset;
use crate::error::DataError;

/// AR(1) coefficient of the noise component.
pub const AR1_COEFF: f64 = 0.8;

/// Lowest value the generator will emit (values are clamped here so that
/// percentage errors stay defined).
pub const FLOOR: f64 = 1.0;

/// Shape of the generated series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProfile {
    /// Resting level in beats/min.
    pub baseline: f64,
    /// Amplitude of the sinusoidal drift in beats/min.
    pub drift_amplitude: f64,
    /// Drift period in samples.
    pub drift_period: f64,
    /// Standard deviation of the AR(1) innovation noise.
    pub noise_std: f64,
}

impl Default for SyntheticProfile {
    fn default() -> Self {
        Self {
            baseline: 75.0,
            drift_amplitude: 6.0,
            drift_period: 900.0,
            noise_std: 1.5,
        }
    }
}

/// Generates a deterministic series of `n` points for the given seed and
/// profile. With `noise_std = 0` the output is exactly `baseline + drift`.
pub fn generate_synthetic(
    n: usize,
    seed: u64,
    profile: &SyntheticProfile,
) -> Result<SeriesDataset, DataError> {
    if profile.noise_std < 0.0 {
        return Err(DataError::NegativeNoise(profile.noise_std));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // std_dev = 0 is a valid degenerate normal; samples are exactly the mean.
    let innovations = Normal::new(0.0, profile.noise_std).expect("std validated above");

    let omega = 2.0 * std::f64::consts::PI / profile.drift_period;
    let mut ar = 0.0_f64;
    let values: Vec<f64> = (0..n)
        .map(|t| {
            ar = AR1_COEFF * ar + innovations.sample(&mut rng);
            let drift = profile.drift_amplitude * (omega * t as f64).sin();
            (profile.baseline + drift + ar).max(FLOOR)
        })
        .collect();

    SeriesDataset::new(
        values,
        None,
        format!("synthetic(n={n}, seed={seed}, noise={})", profile.noise_std),
    )
}
