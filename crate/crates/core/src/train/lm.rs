//! Levenberg-Marquardt training: damped Gauss-Newton steps on the sum of
//! squared errors, interpolating toward gradient descent as the damping
//! factor mu grows.

use nalgebra::{DMatrix, DVector};

use crate::data::{DivisionPlan, RegressionSet};
use crate::error::TrainError;
use crate::model::{errors_and_jacobian, sse, NarNetwork};
use crate::train::{
    finish_report, split_mses, weights_of, EarlyStop, EpochRecord, StopDecision, StopReason,
    TrainConfig, TrainReport, MU_FLOOR,
};

/// Solves the damped normal equations (J^T J + mu I) delta = -J^T e.
///
/// `jacobian` holds de/dw, so -J^T e is the descent direction of the half
/// squared error. As mu -> 0 the step approaches the Gauss-Newton step; as
/// mu -> infinity it approaches steepest descent scaled by 1/mu. Returns
/// `None` when the damped matrix is so close to singular that the Cholesky
/// factorization fails.
pub fn lm_step(jacobian: &DMatrix<f64>, errors: &DVector<f64>, mu: f64) -> Option<DVector<f64>> {
    let p = jacobian.ncols();
    let mut damped = jacobian.transpose() * jacobian;
    for i in 0..p {
        damped[(i, i)] += mu;
    }
    let rhs = -(jacobian.transpose() * errors);
    damped.cholesky().map(|ch| ch.solve(&rhs))
}

pub(crate) fn train_lm(
    net: &NarNetwork,
    reg: &RegressionSet,
    plan: &DivisionPlan,
    config: &TrainConfig,
) -> Result<TrainReport, TrainError> {
    let mut w = weights_of(net);
    let mut mu = config.mu0;
    let mut early = EarlyStop::new(config.max_val_fail, w.clone());
    let mut history = Vec::new();
    let mut stop_reason = None;

    for epoch in 1..=config.max_epochs {
        let current = net.with_weights(&w);
        let (errors, jacobian) = errors_and_jacobian(&current, reg, &plan.train_idx)?;
        let current_sse = errors.dot(&errors);
        if !current_sse.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch });
        }
        let gradient_norm = 2.0 * (jacobian.transpose() * &errors).amax();
        if gradient_norm < config.min_gradient {
            stop_reason = Some(StopReason::MinGradient);
            break;
        }

        // Retry with inflated damping until a step reduces the SSE.
        let mut accepted = None;
        while mu <= config.mu_max {
            if let Some(delta) = lm_step(&jacobian, &errors, mu) {
                let trial_w = &w + &delta;
                let trial_net = net.with_weights(&trial_w);
                let trial_sse = sse(&trial_net, reg, &plan.train_idx)?;
                if trial_sse.is_finite() && trial_sse < current_sse {
                    accepted = Some((trial_w, trial_net, trial_sse));
                    break;
                }
            }
            mu *= config.mu_inc;
        }
        let Some((new_w, new_net, new_sse)) = accepted else {
            stop_reason = Some(StopReason::MuMax);
            break;
        };
        w = new_w;
        mu = (mu * config.mu_dec).max(MU_FLOOR);

        let (train_mse, val_mse, test_mse) = split_mses(&new_net, reg, plan);
        history.push(EpochRecord {
            epoch,
            train_mse,
            val_mse,
            test_mse,
            gradient_norm,
            damping: mu,
            br: None,
        });

        let decision = early.update(epoch, val_mse, &w);
        if new_sse == 0.0 {
            stop_reason = Some(StopReason::Converged);
            break;
        }
        if decision == StopDecision::Stop {
            stop_reason = Some(StopReason::MaxValFail);
            break;
        }
    }

    let stop_reason = stop_reason.unwrap_or(StopReason::MaxEpochs);
    Ok(finish_report(net, config, history, stop_reason, early))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{
        embed_lags, generate_synthetic, plan_division, DivisionMethod, Normalizer, SeriesDataset,
        SplitSpec, SyntheticProfile,
    };
    use crate::model::{init_network, InitScheme};
    use crate::train::{train, Algorithm};

    fn toy_instance() -> (NarNetwork, RegressionSet, Vec<usize>) {
        let values: Vec<f64> = (0..80)
            .map(|i| 70.0 + 8.0 * ((i as f64) * 0.31).sin() + 3.0 * ((i as f64) * 0.11).cos())
            .collect();
        let ds = SeriesDataset::new(values, None, "toy").unwrap();
        let nz = Normalizer::fit(ds.values()).unwrap();
        let reg = embed_lags(&ds, 2, &nz).unwrap();
        let net = init_network(2, 3, 5, InitScheme::UniformSmall, nz);
        let idx: Vec<usize> = (0..40).collect();
        (net, reg, idx)
    }

    #[test]
    fn tiny_mu_step_matches_gauss_newton_oracle() {
        // Well-conditioned linear least-squares instance; the undamped
        // normal equations solved by LU are the independent oracle.
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let j = DMatrix::from_fn(20, 5, |r, c| {
            if r == c { 2.0 } else { rng.random_range(-0.5..0.5) }
        });
        let e = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));
        let step = lm_step(&j, &e, 1e-10).unwrap();
        let gn = (j.transpose() * &j)
            .lu()
            .solve(&(-(j.transpose() * &e)))
            .unwrap();
        let diff = (&step - &gn).norm() / gn.norm();
        assert!(diff < 1e-8, "relative deviation from Gauss-Newton: {diff:.3e}");
    }

    #[test]
    fn huge_mu_step_is_scaled_steepest_descent() {
        let (net, reg, idx) = toy_instance();
        let (e, j) = errors_and_jacobian(&net, &reg, &idx).unwrap();
        let step = lm_step(&j, &e, 1e9).unwrap();
        let descent = -(j.transpose() * &e);
        let cosine = step.dot(&descent) / (step.norm() * descent.norm());
        assert!(
            cosine > 0.999,
            "step should align with the descent direction, cosine = {cosine}"
        );
        // And its magnitude is ~ ||descent|| / mu.
        let ratio = step.norm() * 1e9 / descent.norm();
        assert!((ratio - 1.0).abs() < 1e-2, "magnitude ratio {ratio}");
    }

    #[test]
    fn one_sample_quadratic_step_reaches_the_minimizer() {
        // Residual e(w) = c - w on a single sample: J = de/dw = -1 and the
        // Gauss-Newton step from w0 is exactly c - w0.
        let j = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let e = DVector::from_vec(vec![3.5]); // c - w0
        let step = lm_step(&j, &e, 1e-14).unwrap();
        assert!((step[0] - 3.5).abs() < 1e-9);
    }

    #[test]
    fn accepted_epochs_strictly_decrease_train_sse() {
        let profile = SyntheticProfile::default();
        let ds = generate_synthetic(400, 3, &profile).unwrap();
        let nz = Normalizer::fit(ds.values()).unwrap();
        let reg = embed_lags(&ds, 2, &nz).unwrap();
        let spec = SplitSpec::scenario(5).unwrap();
        let plan = plan_division(reg.n_targets(), &spec, DivisionMethod::RandomInterleaved, 9)
            .unwrap();
        let net = init_network(2, 6, 1, InitScheme::NguyenWidrow, nz);
        let config = TrainConfig {
            algorithm: Algorithm::Lm,
            max_epochs: 60,
            ..Default::default()
        };
        let report = train(&net, &reg, &plan, &config).unwrap();
        assert!(report.epochs_run > 3, "expected a few accepted epochs");
        for pair in report.history.windows(2) {
            assert!(
                pair[1].train_mse < pair[0].train_mse,
                "train MSE rose between accepted epochs {} and {}",
                pair[0].epoch,
                pair[1].epoch
            );
        }
    }

    #[test]
    fn zero_epoch_budget_returns_initial_network() {
        let (net, reg, _) = toy_instance();
        let spec = SplitSpec::scenario(5).unwrap();
        let plan = plan_division(reg.n_targets(), &spec, DivisionMethod::ContiguousBlock, 0)
            .unwrap();
        let config = TrainConfig {
            algorithm: Algorithm::Lm,
            max_epochs: 0,
            ..Default::default()
        };
        let report = train(&net, &reg, &plan, &config).unwrap();
        assert_eq!(report.epochs_run, 0);
        assert_eq!(report.stop_reason, StopReason::MaxEpochs);
        assert_eq!(report.best_epoch, 0);
        assert_eq!(report.final_network, net);
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let profile = SyntheticProfile::default();
        let ds = generate_synthetic(300, 11, &profile).unwrap();
        let nz = Normalizer::fit(ds.values()).unwrap();
        let reg = embed_lags(&ds, 2, &nz).unwrap();
        let spec = SplitSpec::scenario(4).unwrap();
        let plan =
            plan_division(reg.n_targets(), &spec, DivisionMethod::RandomInterleaved, 2).unwrap();
        let net = init_network(2, 5, 7, InitScheme::NguyenWidrow, nz);
        let config = TrainConfig {
            algorithm: Algorithm::Lm,
            max_epochs: 40,
            ..Default::default()
        };
        let a = train(&net, &reg, &plan, &config).unwrap();
        let b = train(&net, &reg, &plan, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn final_network_is_best_validation_snapshot() {
        let profile = SyntheticProfile {
            noise_std: 4.0,
            ..Default::default()
        };
        let ds = generate_synthetic(300, 21, &profile).unwrap();
        let nz = Normalizer::fit(ds.values()).unwrap();
        let reg = embed_lags(&ds, 2, &nz).unwrap();
        let spec = SplitSpec::scenario(7).unwrap();
        let plan =
            plan_division(reg.n_targets(), &spec, DivisionMethod::RandomInterleaved, 3).unwrap();
        let net = init_network(2, 8, 13, InitScheme::NguyenWidrow, nz);
        let config = TrainConfig {
            algorithm: Algorithm::Lm,
            max_epochs: 200,
            ..Default::default()
        };
        let report = train(&net, &reg, &plan, &config).unwrap();
        let best = report
            .history
            .iter()
            .min_by(|a, b| a.val_mse.partial_cmp(&b.val_mse).unwrap())
            .unwrap();
        assert_eq!(best.epoch, report.best_epoch);
        // Re-evaluating the returned network reproduces the recorded best
        // validation MSE.
        let val = crate::train::set_mse(&report.final_network, &reg, &plan.val_idx);
        assert_eq!(val, best.val_mse);
    }
}
