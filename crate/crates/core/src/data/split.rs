//! Train/validation/test division planning.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Fractions used for the preset split scenarios, from 90/5/5 down to
/// 30/35/35.
pub const SCENARIO_FRACTIONS: [(f64, f64, f64); 7] = [
    (0.90, 0.05, 0.05),
    (0.80, 0.10, 0.10),
    (0.70, 0.15, 0.15),
    (0.60, 0.20, 0.20),
    (0.50, 0.25, 0.25),
    (0.40, 0.30, 0.30),
    (0.30, 0.35, 0.35),
];

/// A named three-way split, fractions summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub name: String,
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
}

impl SplitSpec {
    pub fn new(
        name: impl Into<String>,
        train_frac: f64,
        val_frac: f64,
        test_frac: f64,
    ) -> Result<Self, DataError> {
        let name = name.into();
        let sum = train_frac + val_frac + test_frac;
        let positive = train_frac > 0.0 && val_frac > 0.0 && test_frac > 0.0;
        if !positive || (sum - 1.0).abs() > 1e-12 {
            return Err(DataError::BadFractions { name, sum });
        }
        Ok(Self {
            name,
            train_frac,
            val_frac,
            test_frac,
        })
    }

    /// Preset scenario `k` in 1..=7 (scenario 1 = 90/5/5, scenario 7 = 30/35/35).
    pub fn scenario(k: usize) -> Result<Self, DataError> {
        if !(1..=7).contains(&k) {
            return Err(DataError::BadFractions {
                name: format!("scenario{k}"),
                sum: f64::NAN,
            });
        }
        let (t, v, s) = SCENARIO_FRACTIONS[k - 1];
        Self::new(format!("scenario{k}"), t, v, s)
    }

    pub fn all_scenarios() -> Vec<Self> {
        (1..=7).map(|k| Self::scenario(k).expect("presets are valid")).collect()
    }
}

/// How target indices are assigned to the three sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DivisionMethod {
    /// Seeded uniform shuffle of all target indices, cut into the three
    /// counts. Mirrors the toolbox default.
    #[default]
    RandomInterleaved,
    /// First block train, middle validation, last test, in time order.
    ContiguousBlock,
}

/// Disjoint, exhaustive index sets over the regression targets.
///
/// Each set is stored sorted ascending so that summation order is fixed
/// by sample index.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisionPlan {
    pub train_idx: Vec<usize>,
    pub val_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub method: DivisionMethod,
    pub seed: u64,
}

impl DivisionPlan {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.train_idx.len(), self.val_idx.len(), self.test_idx.len())
    }

    pub fn n_targets(&self) -> usize {
        self.train_idx.len() + self.val_idx.len() + self.test_idx.len()
    }
}

/// Splits `0..n_targets` into train/validation/test index sets.
///
/// Counts follow the rounding rule: train = round(train_frac * n),
/// val = round(val_frac * n), test = remainder. On 6312 targets the
/// 30/35/35 split therefore yields (1894, 2209, 2209) and 50/25/25
/// yields (3156, 1578, 1578).
pub fn plan_division(
    n_targets: usize,
    spec: &SplitSpec,
    method: DivisionMethod,
    seed: u64,
) -> Result<DivisionPlan, DataError> {
    let n = n_targets as f64;
    let train_count = (spec.train_frac * n).round() as usize;
    let val_count = (spec.val_frac * n).round() as usize;

    let empty = |part: &'static str| DataError::EmptySplit {
        name: spec.name.clone(),
        part,
        n_targets,
    };
    if train_count == 0 {
        return Err(empty("train"));
    }
    if val_count == 0 {
        return Err(empty("validation"));
    }
    let test_count = n_targets
        .checked_sub(train_count + val_count)
        .ok_or_else(|| empty("test"))?;
    if test_count == 0 {
        return Err(empty("test"));
    }

    let mut indices: Vec<usize> = (0..n_targets).collect();
    if method == DivisionMethod::RandomInterleaved {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);
    }

    let mut train_idx: Vec<usize> = indices[..train_count].to_vec();
    let mut val_idx: Vec<usize> = indices[train_count..train_count + val_count].to_vec();
    let mut test_idx: Vec<usize> = indices[train_count + val_count..].to_vec();
    train_idx.sort_unstable();
    val_idx.sort_unstable();
    test_idx.sort_unstable();

    Ok(DivisionPlan {
        train_idx,
        val_idx,
        test_idx,
        method,
        seed,
    })
}
