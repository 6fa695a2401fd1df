//! Training algorithms: damped Gauss-Newton (LM), its Bayesian-regularized
//! variant, and scaled conjugate gradient, all sharing one early-stopping
//! controller and per-epoch record format.
//!
//! Trainers minimize in the normalized domain; the MSEs they record are in
//! original units so they line up with the reported metrics.

mod br;
mod early_stop;
mod lm;
mod scg;

pub use br::BrState;
pub use early_stop::{EarlyStop, StopDecision};
pub use lm::lm_step;
pub use scg::{ScgObjective, ScgState, ScgStep};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::data::{DivisionPlan, RegressionSet};
use crate::error::TrainError;
use crate::model::NarNetwork;

/// Damping never decays below this, so repeated accepted steps cannot
/// underflow it to zero.
pub(crate) const MU_FLOOR: f64 = 1e-20;

/// The three training algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lm,
    Br,
    Scg,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Lm => "lm",
            Algorithm::Br => "br",
            Algorithm::Scg => "scg",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lm" => Ok(Algorithm::Lm),
            "br" => Ok(Algorithm::Br),
            "scg" => Ok(Algorithm::Scg),
            other => Err(format!("unknown algorithm '{other}' (expected lm, br, or scg)")),
        }
    }
}

impl Algorithm {
    pub fn all() -> [Algorithm; 3] {
        [Algorithm::Lm, Algorithm::Br, Algorithm::Scg]
    }

    /// Long-form name for report rendering.
    pub fn long_name(&self) -> &'static str {
        match self {
            Algorithm::Lm => "Levenberg-Marquardt",
            Algorithm::Br => "Bayesian Regularization",
            Algorithm::Scg => "Scaled Conjugate Gradient",
        }
    }
}

/// Why a training run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    MinGradient,
    MaxValFail,
    MuMax,
    Converged,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::MaxEpochs => "max_epochs",
            StopReason::MinGradient => "min_gradient",
            StopReason::MaxValFail => "max_val_fail",
            StopReason::MuMax => "mu_max",
            StopReason::Converged => "converged",
        })
    }
}

/// Hyperparameters shared by all trainers plus the per-algorithm constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub max_epochs: usize,
    /// Consecutive validation checks without improvement before stopping.
    pub max_val_fail: usize,
    /// Infinity-norm threshold on the squared-error gradient.
    pub min_gradient: f64,
    pub mu0: f64,
    pub mu_inc: f64,
    pub mu_dec: f64,
    pub mu_max: f64,
    pub sigma0: f64,
    pub lambda0: f64,
    /// Keep validation early stopping active for the Bayesian trainer.
    pub br_validation_stop: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Lm,
            max_epochs: 1000,
            max_val_fail: 6,
            min_gradient: 1e-7,
            mu0: 1e-3,
            mu_inc: 10.0,
            mu_dec: 0.1,
            mu_max: 1e10,
            sigma0: 5e-5,
            lambda0: 5e-7,
            br_validation_stop: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::InvalidConfig(msg.to_string()));
        if self.max_val_fail < 1 {
            return bad("max_val_fail must be at least 1");
        }
        if !(self.min_gradient > 0.0) {
            return bad("min_gradient must be positive");
        }
        if !(self.mu_dec < 1.0 && 1.0 < self.mu_inc) {
            return bad("need mu_dec < 1 < mu_inc");
        }
        if !(self.mu0 > 0.0 && self.mu_max > 0.0) {
            return bad("mu0 and mu_max must be positive");
        }
        if !(self.sigma0 > 0.0 && self.lambda0 > 0.0) {
            return bad("sigma0 and lambda0 must be positive");
        }
        Ok(())
    }
}

/// Evidence-framework state recorded per epoch by the Bayesian trainer;
/// re-exported here for the report types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrEpoch {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub e_w: f64,
    pub e_d: f64,
}

/// One epoch of the training record. MSEs are in original units; the
/// damping column holds mu for the damped trainers and lambda for scaled
/// conjugate gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    pub test_mse: f64,
    pub gradient_norm: f64,
    pub damping: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub br: Option<BrEpoch>,
}

/// Complete record of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub algorithm: Algorithm,
    pub config: TrainConfig,
    pub epochs_run: usize,
    pub stop_reason: StopReason,
    /// Epoch with the lowest validation MSE; 0 means the initial network
    /// was never improved upon (or no epochs ran).
    pub best_epoch: usize,
    pub best_val_mse: Option<f64>,
    pub history: Vec<EpochRecord>,
    /// Weights restored to the best-validation snapshot.
    pub final_network: NarNetwork,
}

/// Trains `net` on the training split of `plan`, evaluating all three
/// splits every epoch. The input network is not modified; the report
/// carries the weights restored to the best validation epoch. Fully
/// deterministic in its inputs.
pub fn train(
    net: &NarNetwork,
    reg: &RegressionSet,
    plan: &DivisionPlan,
    config: &TrainConfig,
) -> Result<TrainReport, TrainError> {
    config.validate()?;
    match config.algorithm {
        Algorithm::Lm => lm::train_lm(net, reg, plan, config),
        Algorithm::Br => br::train_br(net, reg, plan, config),
        Algorithm::Scg => scg::train_scg(net, reg, plan, config),
    }
}

/// Mean squared error over one index set, original units, summed in index
/// order.
pub(crate) fn set_mse(net: &NarNetwork, reg: &RegressionSet, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let nz = net.normalizer();
    let mut total = 0.0;
    for &i in idx {
        let pred = nz.invert(net.forward(&reg.input_row(i)));
        let err = reg.targets_raw()[i] - pred;
        total += err * err;
    }
    total / idx.len() as f64
}

/// Train/validation/test MSEs for one weight state.
pub(crate) fn split_mses(
    net: &NarNetwork,
    reg: &RegressionSet,
    plan: &DivisionPlan,
) -> (f64, f64, f64) {
    (
        set_mse(net, reg, &plan.train_idx),
        set_mse(net, reg, &plan.val_idx),
        set_mse(net, reg, &plan.test_idx),
    )
}

/// Assembles the common report tail shared by the three trainers.
pub(crate) fn finish_report(
    base: &NarNetwork,
    config: &TrainConfig,
    history: Vec<EpochRecord>,
    stop_reason: StopReason,
    early: EarlyStop,
) -> TrainReport {
    let best_epoch = early.best_epoch();
    let best_val_mse = early.best_val();
    let final_network = base.with_weights(early.best_weights());
    TrainReport {
        algorithm: config.algorithm,
        config: config.clone(),
        epochs_run: history.len(),
        stop_reason,
        best_epoch,
        best_val_mse,
        history,
        final_network,
    }
}

/// Weight vector of a network, as the trainers see it.
pub(crate) fn weights_of(net: &NarNetwork) -> DVector<f64> {
    net.flatten().0
}
