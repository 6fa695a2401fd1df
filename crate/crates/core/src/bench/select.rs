//! Best-scenario selection per algorithm.

use serde::{Deserialize, Serialize};

use crate::bench::matrix::GridCell;
use crate::bench::scenario::ScenarioResult;
use crate::error::BenchError;

/// Ranking rule for picking each algorithm's best scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionCriterion {
    MinTestMse,
    MaxAccuracy,
    MaxR,
    /// Lowest test MSE, ties broken by higher correlation, then by higher
    /// efficiency (preferring the smaller training share at equal error).
    #[default]
    Composite,
}

impl std::fmt::Display for SelectionCriterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectionCriterion::MinTestMse => "min_test_mse",
            SelectionCriterion::MaxAccuracy => "max_accuracy",
            SelectionCriterion::MaxR => "max_r",
            SelectionCriterion::Composite => "composite",
        })
    }
}

impl std::str::FromStr for SelectionCriterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "min_test_mse" | "mse" => Ok(Self::MinTestMse),
            "max_accuracy" | "accuracy" => Ok(Self::MaxAccuracy),
            "max_r" | "r" => Ok(Self::MaxR),
            "composite" => Ok(Self::Composite),
            other => Err(format!("unknown selection criterion '{other}'")),
        }
    }
}

/// True when `a` strictly beats `b` under the criterion; equal rows keep
/// the earlier one, so scenario order breaks remaining ties.
fn beats(a: &ScenarioResult, b: &ScenarioResult, criterion: SelectionCriterion) -> bool {
    let (am, bm) = (&a.test_metrics, &b.test_metrics);
    match criterion {
        SelectionCriterion::MinTestMse => am.mse < bm.mse,
        SelectionCriterion::MaxAccuracy => am.accuracy_percent > bm.accuracy_percent,
        SelectionCriterion::MaxR => am.r > bm.r,
        SelectionCriterion::Composite => {
            if am.mse != bm.mse {
                return am.mse < bm.mse;
            }
            if am.r != bm.r {
                return am.r > bm.r;
            }
            a.efficiency > b.efficiency
        }
    }
}

/// Picks the best finished row per algorithm, in first-appearance order of
/// the algorithms within `cells`. Errors when no cell finished at all.
pub fn select_best(
    cells: &[GridCell],
    criterion: SelectionCriterion,
) -> Result<Vec<&ScenarioResult>, BenchError> {
    let mut order: Vec<crate::train::Algorithm> = Vec::new();
    for cell in cells {
        if !order.contains(&cell.algorithm) {
            order.push(cell.algorithm);
        }
    }

    let mut best: Vec<&ScenarioResult> = Vec::new();
    for algorithm in order {
        let winner = cells
            .iter()
            .filter(|c| c.algorithm == algorithm)
            .filter_map(|c| c.result.as_ref())
            .fold(None::<&ScenarioResult>, |acc, row| match acc {
                None => Some(row),
                Some(current) => {
                    if beats(row, current, criterion) {
                        Some(row)
                    } else {
                        Some(current)
                    }
                }
            });
        if let Some(row) = winner {
            best.push(row);
        }
    }
    if best.is_empty() {
        return Err(BenchError::EmptyTable);
    }
    Ok(best)
}
