//! Validation-based early stopping shared by all trainers.

use nalgebra::DVector;

/// Verdict of one validation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop,
}

/// Tracks the best validation MSE seen so far, snapshots the weights that
/// produced it, and counts consecutive non-improving checks.
#[derive(Debug, Clone)]
pub struct EarlyStop {
    max_fail: usize,
    best_val: f64,
    best_weights: DVector<f64>,
    best_epoch: usize,
    fails: usize,
}

impl EarlyStop {
    /// `initial_weights` is the fallback snapshot returned when no epoch
    /// ever improves on it.
    pub fn new(max_fail: usize, initial_weights: DVector<f64>) -> Self {
        Self {
            max_fail,
            best_val: f64::INFINITY,
            best_weights: initial_weights,
            best_epoch: 0,
            fails: 0,
        }
    }

    /// Feeds one epoch's validation MSE. An improvement resets the fail
    /// counter and snapshots `weights`; the `max_fail`-th consecutive
    /// non-improvement returns [`StopDecision::Stop`].
    pub fn update(&mut self, epoch: usize, val_mse: f64, weights: &DVector<f64>) -> StopDecision {
        if val_mse < self.best_val {
            self.best_val = val_mse;
            self.best_weights.copy_from(weights);
            self.best_epoch = epoch;
            self.fails = 0;
            StopDecision::Continue
        } else {
            self.fails += 1;
            if self.fails >= self.max_fail {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            }
        }
    }

    pub fn fails(&self) -> usize {
        self.fails
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    /// Lowest validation MSE seen, or `None` before any check.
    pub fn best_val(&self) -> Option<f64> {
        (self.best_epoch > 0).then_some(self.best_val)
    }

    pub fn best_weights(&self) -> &DVector<f64> {
        &self.best_weights
    }
}
