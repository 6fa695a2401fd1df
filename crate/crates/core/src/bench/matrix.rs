//! The benchmark grid: every algorithm against every split scenario, with
//! per-cell seeds derived from a master seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::scenario::{run_scenario, RunSettings, ScenarioResult};
use crate::data::{SeriesDataset, SplitSpec};
use crate::error::BenchError;
use crate::train::Algorithm;

/// One grid cell: either a finished result or the error that stopped it.
/// A failed cell never aborts the rest of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub algorithm: Algorithm,
    pub scenario: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ScenarioResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// splitmix64 finalizer; a bijection on u64.
fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Per-cell seed. Injective over (algorithm index, scenario index) pairs
/// for a fixed master seed as long as fewer than 2^32 scenarios are used.
pub fn derive_seed(master_seed: u64, algorithm_index: usize, scenario_index: usize) -> u64 {
    let pair = ((algorithm_index as u64) << 32) | (scenario_index as u64);
    mix64(master_seed.wrapping_add(0x9e3779b97f4a7c15).wrapping_add(pair)) ^ mix64(pair)
}

/// Runs the full grid. Cell order is algorithms-outer, scenarios-inner;
/// with `parallel = true` the cells run on a rayon pool but land in the
/// same order with identical contents.
pub fn run_matrix(
    dataset: &SeriesDataset,
    algorithms: &[Algorithm],
    scenarios: &[SplitSpec],
    settings: &RunSettings,
    master_seed: u64,
    parallel: bool,
) -> Result<Vec<GridCell>, BenchError> {
    if algorithms.is_empty() {
        return Err(BenchError::InvalidRequest("no algorithms requested".into()));
    }
    if scenarios.is_empty() {
        return Err(BenchError::InvalidRequest("no scenarios requested".into()));
    }

    let jobs: Vec<(usize, usize)> = (0..algorithms.len())
        .flat_map(|a| (0..scenarios.len()).map(move |s| (a, s)))
        .collect();

    let run_cell = |&(a, s): &(usize, usize)| -> GridCell {
        let algorithm = algorithms[a];
        let scenario = &scenarios[s];
        let seed = derive_seed(master_seed, a, s);
        match run_scenario(dataset, algorithm, scenario, settings, seed) {
            Ok(run) => GridCell {
                algorithm,
                scenario: scenario.name.clone(),
                seed,
                result: Some(run.result),
                error: None,
            },
            Err(e) => GridCell {
                algorithm,
                scenario: scenario.name.clone(),
                seed,
                result: None,
                error: Some(e.to_string()),
            },
        }
    };

    let cells = if parallel {
        jobs.par_iter().map(run_cell).collect()
    } else {
        jobs.iter().map(run_cell).collect()
    };
    Ok(cells)
}
