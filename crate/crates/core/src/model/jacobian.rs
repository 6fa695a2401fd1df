//! Per-sample error Jacobian and loss gradient by backpropagation.
//!
//! Sign convention: the residual is e = target - output, and the Jacobian
//! holds J[i][p] = de_i/dw_p. The gradient of the half squared error
//! 0.5 * sum(e^2) is then J^T e.

use nalgebra::{DMatrix, DVector};

use crate::data::RegressionSet;
use crate::error::ModelError;
use crate::model::network::NarNetwork;

/// Residual vector and its Jacobian over the targets in `idx`.
///
/// Returns `(e, J)` with `e` of length `|idx|` and `J` of shape `|idx| x P`,
/// both in the normalized domain.
pub fn errors_and_jacobian(
    net: &NarNetwork,
    reg: &RegressionSet,
    idx: &[usize],
) -> Result<(DVector<f64>, DMatrix<f64>), ModelError> {
    if idx.is_empty() {
        return Err(ModelError::EmptyIndexSet);
    }
    let n_targets = reg.n_targets();
    let d = net.lag_count();
    let h = net.hidden_count();
    let p = net.param_count();

    let mut errors = DVector::zeros(idx.len());
    let mut jac = DMatrix::zeros(idx.len(), p);

    for (row, &i) in idx.iter().enumerate() {
        if i >= n_targets {
            return Err(ModelError::IndexOutOfRange {
                index: i,
                n_targets,
            });
        }
        let x = reg.input_row(i);
        let a = net.hidden_activations(&x);
        let y: f64 = net.output_bias()
            + net
                .output_weights()
                .iter()
                .zip(a.iter())
                .map(|(ow, aj)| ow * aj)
                .sum::<f64>();
        errors[row] = reg.targets()[i] - y;

        // de/dw = -dy/dw for every parameter.
        for j in 0..h {
            let slope = net.output_weights()[j] * (1.0 - a[j] * a[j]);
            for (k, &xk) in x.iter().enumerate() {
                jac[(row, j * d + k)] = -slope * xk;
            }
            jac[(row, h * d + j)] = -slope;
            jac[(row, h * d + h + j)] = -a[j];
        }
        jac[(row, p - 1)] = -1.0;
    }
    Ok((errors, jac))
}

/// Sum of squared errors over `idx`, normalized domain.
pub fn sse(net: &NarNetwork, reg: &RegressionSet, idx: &[usize]) -> Result<f64, ModelError> {
    let n_targets = reg.n_targets();
    let mut total = 0.0;
    for &i in idx {
        if i >= n_targets {
            return Err(ModelError::IndexOutOfRange {
                index: i,
                n_targets,
            });
        }
        let e = reg.targets()[i] - net.forward(&reg.input_row(i));
        total += e * e;
    }
    Ok(total)
}

/// Sum of squared errors and the gradient of half of it (J^T e), without
/// materializing the Jacobian. Used by the conjugate gradient trainer.
pub fn sse_and_gradient(
    net: &NarNetwork,
    reg: &RegressionSet,
    idx: &[usize],
) -> Result<(f64, DVector<f64>), ModelError> {
    if idx.is_empty() {
        return Err(ModelError::EmptyIndexSet);
    }
    let n_targets = reg.n_targets();
    let d = net.lag_count();
    let h = net.hidden_count();
    let p = net.param_count();

    let mut total = 0.0;
    let mut grad = DVector::zeros(p);
    for &i in idx {
        if i >= n_targets {
            return Err(ModelError::IndexOutOfRange {
                index: i,
                n_targets,
            });
        }
        let x = reg.input_row(i);
        let a = net.hidden_activations(&x);
        let y: f64 = net.output_bias()
            + net
                .output_weights()
                .iter()
                .zip(a.iter())
                .map(|(ow, aj)| ow * aj)
                .sum::<f64>();
        let e = reg.targets()[i] - y;
        total += e * e;

        for j in 0..h {
            let slope = net.output_weights()[j] * (1.0 - a[j] * a[j]);
            for (k, &xk) in x.iter().enumerate() {
                grad[j * d + k] += e * (-slope * xk);
            }
            grad[h * d + j] += e * (-slope);
            grad[h * d + h + j] += e * (-a[j]);
        }
        grad[p - 1] += -e;
    }
    Ok((total, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{embed_lags, Normalizer, SeriesDataset};
    use crate::model::network::{init_network, InitScheme, NarNetwork, WeightVector};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_problem(seed: u64, d: usize, h: usize) -> (NarNetwork, crate::data::RegressionSet) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..60)
            .map(|_| 60.0 + rng.random_range(-10.0..10.0))
            .collect();
        let ds = SeriesDataset::new(values, None, "toy").unwrap();
        let nz = Normalizer::fit(ds.values()).unwrap();
        let reg = embed_lags(&ds, d, &nz).unwrap();
        let net = init_network(d, h, seed, InitScheme::UniformSmall, nz);
        (net, reg)
    }

    /// Central finite differences of the residual vector, the independent
    /// oracle for the analytic Jacobian.
    fn finite_difference_jacobian(
        net: &NarNetwork,
        reg: &crate::data::RegressionSet,
        idx: &[usize],
        step: f64,
    ) -> nalgebra::DMatrix<f64> {
        let w0 = net.flatten().0;
        let p = w0.len();
        let mut jac = nalgebra::DMatrix::zeros(idx.len(), p);
        for col in 0..p {
            let mut plus = w0.clone();
            plus[col] += step;
            let mut minus = w0.clone();
            minus[col] -= step;
            let net_plus = NarNetwork::unflatten(
                &WeightVector(plus),
                net.lag_count(),
                net.hidden_count(),
                *net.normalizer(),
            )
            .unwrap();
            let net_minus = NarNetwork::unflatten(
                &WeightVector(minus),
                net.lag_count(),
                net.hidden_count(),
                *net.normalizer(),
            )
            .unwrap();
            for (row, &i) in idx.iter().enumerate() {
                let x = reg.input_row(i);
                let e_plus = reg.targets()[i] - net_plus.forward(&x);
                let e_minus = reg.targets()[i] - net_minus.forward(&x);
                jac[(row, col)] = (e_plus - e_minus) / (2.0 * step);
            }
        }
        jac
    }

    #[test]
    fn output_bias_column_is_minus_one() {
        let (net, reg) = toy_problem(3, 2, 4);
        let idx: Vec<usize> = (0..10).collect();
        let (_, jac) = errors_and_jacobian(&net, &reg, &idx).unwrap();
        let p = net.param_count();
        for row in 0..idx.len() {
            assert_eq!(jac[(row, p - 1)], -1.0);
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        for seed in 0..5 {
            let d = 1 + (seed as usize % 3);
            let h = 1 + (seed as usize % 5);
            let (net, reg) = toy_problem(seed, d, h);
            let idx: Vec<usize> = (0..15).collect();
            let (_, analytic) = errors_and_jacobian(&net, &reg, &idx).unwrap();
            let numeric = finite_difference_jacobian(&net, &reg, &idx, 1e-6);
            let mut worst = 0.0_f64;
            for r in 0..idx.len() {
                for c in 0..net.param_count() {
                    let denom = analytic[(r, c)].abs().max(1.0);
                    worst = worst.max((analytic[(r, c)] - numeric[(r, c)]).abs() / denom);
                }
            }
            assert!(
                worst < 1e-5,
                "seed {seed}: max relative deviation {worst:.3e}"
            );
        }
    }

    #[test]
    fn gradient_agrees_with_jacobian_product() {
        let (net, reg) = toy_problem(8, 2, 5);
        let idx: Vec<usize> = (0..20).collect();
        let (e, jac) = errors_and_jacobian(&net, &reg, &idx).unwrap();
        let (total, grad) = sse_and_gradient(&net, &reg, &idx).unwrap();
        assert!((total - e.dot(&e)).abs() < 1e-12);
        let jte = jac.transpose() * &e;
        for p in 0..grad.len() {
            assert!(
                (grad[p] - jte[p]).abs() < 1e-10,
                "component {p}: {} vs {}",
                grad[p],
                jte[p]
            );
        }
    }

    #[test]
    fn empty_index_set_rejected() {
        let (net, reg) = toy_problem(1, 2, 3);
        assert!(matches!(
            errors_and_jacobian(&net, &reg, &[]),
            Err(ModelError::EmptyIndexSet)
        ));
    }
}
