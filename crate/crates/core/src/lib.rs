//! narlab: nonlinear autoregressive forecasting for univariate vital-sign
//! series, with three classic second-order trainers and a benchmarking
//! harness that trades training-set size against prediction accuracy.
//!
//! The pipeline is: load or synthesize a series, fit a [-1, 1] normalizer,
//! lag-embed it into one-step-ahead regression pairs, plan a
//! train/validation/test division, train a small tanh network, and score
//! the predictions with MSE, MAE, MAPE, correlation, accuracy, and the
//! data-reduction efficiency ratio.

pub mod bench;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod metrics;
pub mod model;
pub mod train;

pub use data::{
    embed_lags, fit_normalizer, generate_synthetic, load_series, plan_division, ColumnSelector,
    DivisionMethod, DivisionPlan, NormalizationPolicy, Normalizer, RegressionSet, SeriesDataset,
    SplitSpec, SyntheticProfile,
};
pub use bench::{run_matrix, run_scenario, BenchReport, RunSettings, ScenarioResult};
pub use metrics::MetricsBundle;
pub use model::{init_network, InitScheme, NarNetwork};
pub use train::{train, Algorithm, StopReason, TrainConfig, TrainReport};
