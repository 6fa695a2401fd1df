//! One-hidden-layer feedforward network with lagged inputs: d inputs,
//! h tanh hidden units, one linear output.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Normalizer, RegressionSet};
use crate::error::ModelError;

/// Flat weight layout identifier; network snapshots record it so a reader
/// can refuse vectors laid out differently.
pub const WEIGHT_LAYOUT: &str = "input_weights_row_major|input_bias|output_weights|output_bias";

/// Version of the snapshot schema written by [`NarNetwork`]'s serde impl.
pub const SNAPSHOT_SCHEMA_VERSION: u32 = 1;

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    /// Every parameter drawn uniformly from [-0.5, 0.5].
    UniformSmall,
    /// First-layer rows scaled to spread the tanh active regions across
    /// the [-1, 1] input range; output layer uniform-small.
    #[default]
    NguyenWidrow,
}

/// Flat parameter vector of length `P = h*d + h + h + 1`, laid out as
/// [`WEIGHT_LAYOUT`] describes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub DVector<f64>);

impl WeightVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

/// The nonlinear autoregressive predictor. Normalized lagged values go in,
/// a normalized one-step-ahead prediction comes out; the attached
/// normalizer converts to and from original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NetworkSnapshot", try_from = "NetworkSnapshot")]
pub struct NarNetwork {
    d: usize,
    h: usize,
    input_weights: DMatrix<f64>,
    input_bias: DVector<f64>,
    output_weights: DVector<f64>,
    output_bias: f64,
    normalizer: Normalizer,
}

impl NarNetwork {
    /// Number of trainable parameters.
    pub fn param_count(&self) -> usize {
        self.h * self.d + 2 * self.h + 1
    }

    pub fn lag_count(&self) -> usize {
        self.d
    }

    pub fn hidden_count(&self) -> usize {
        self.h
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn input_weights(&self) -> &DMatrix<f64> {
        &self.input_weights
    }

    pub fn input_bias(&self) -> &DVector<f64> {
        &self.input_bias
    }

    pub fn output_weights(&self) -> &DVector<f64> {
        &self.output_weights
    }

    pub fn output_bias(&self) -> f64 {
        self.output_bias
    }

    /// Evaluates the network on one normalized input window.
    ///
    /// output = b_out + sum_j ow_j * tanh(b_j + sum_k w_jk * x_k)
    pub fn forward(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        let mut out = self.output_bias;
        for j in 0..self.h {
            let mut z = self.input_bias[j];
            for (k, &xk) in x.iter().enumerate() {
                z += self.input_weights[(j, k)] * xk;
            }
            out += self.output_weights[j] * z.tanh();
        }
        out
    }

    /// Hidden activations for one input window; used by the backprop
    /// routines.
    pub(crate) fn hidden_activations(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.h, |j, _| {
            let mut z = self.input_bias[j];
            for (k, &xk) in x.iter().enumerate() {
                z += self.input_weights[(j, k)] * xk;
            }
            z.tanh()
        })
    }

    /// Open-loop predictions in original units for the targets in `idx`
    /// (measured lagged values as inputs, one step ahead).
    pub fn predict_targets(
        &self,
        reg: &RegressionSet,
        idx: &[usize],
    ) -> Result<Vec<f64>, ModelError> {
        let n = reg.n_targets();
        let mut out = Vec::with_capacity(idx.len());
        for &i in idx {
            if i >= n {
                return Err(ModelError::IndexOutOfRange {
                    index: i,
                    n_targets: n,
                });
            }
            out.push(self.normalizer.invert(self.forward(&reg.input_row(i))));
        }
        Ok(out)
    }

    /// Serializes the parameters into the documented flat layout.
    pub fn flatten(&self) -> WeightVector {
        let p = self.param_count();
        let mut w = DVector::zeros(p);
        let mut at = 0;
        for j in 0..self.h {
            for k in 0..self.d {
                w[at] = self.input_weights[(j, k)];
                at += 1;
            }
        }
        for j in 0..self.h {
            w[at] = self.input_bias[j];
            at += 1;
        }
        for j in 0..self.h {
            w[at] = self.output_weights[j];
            at += 1;
        }
        w[at] = self.output_bias;
        WeightVector(w)
    }

    /// Rebuilds a network from a flat vector. The inverse of [`flatten`]
    /// for matching `(d, h)`.
    ///
    /// [`flatten`]: NarNetwork::flatten
    pub fn unflatten(
        weights: &WeightVector,
        d: usize,
        h: usize,
        normalizer: Normalizer,
    ) -> Result<Self, ModelError> {
        let expected = h * d + 2 * h + 1;
        if weights.len() != expected {
            return Err(ModelError::WeightLength {
                got: weights.len(),
                expected,
                d,
                h,
            });
        }
        let w = &weights.0;
        let input_weights = DMatrix::from_fn(h, d, |j, k| w[j * d + k]);
        let input_bias = DVector::from_fn(h, |j, _| w[h * d + j]);
        let output_weights = DVector::from_fn(h, |j, _| w[h * d + h + j]);
        let output_bias = w[expected - 1];
        Ok(Self {
            d,
            h,
            input_weights,
            input_bias,
            output_weights,
            output_bias,
            normalizer,
        })
    }

    /// Clone of this network with the parameters replaced by `w`.
    pub(crate) fn with_weights(&self, w: &DVector<f64>) -> Self {
        Self::unflatten(&WeightVector(w.clone()), self.d, self.h, self.normalizer)
            .expect("trainer weight vectors preserve length")
    }
}

/// Builds a network with freshly initialized weights. Deterministic for a
/// fixed `(d, h, seed, scheme)`.
pub fn init_network(
    d: usize,
    h: usize,
    seed: u64,
    scheme: InitScheme,
    normalizer: Normalizer,
) -> NarNetwork {
    assert!(d >= 1, "need at least one lag");
    assert!(h >= 1, "need at least one hidden unit");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> f64 { rng.random_range(-0.5..0.5) };

    let mut input_weights = DMatrix::from_fn(h, d, |_, _| draw(&mut rng));
    let mut input_bias = DVector::from_fn(h, |_, _| draw(&mut rng));
    let output_weights = DVector::from_fn(h, |_, _| draw(&mut rng));
    let output_bias = draw(&mut rng);

    if scheme == InitScheme::NguyenWidrow {
        // Spread the hidden-unit active regions over the [-1, 1] cube:
        // rows rescaled to a common magnitude, biases spaced evenly.
        let magnitude = 0.7 * (h as f64).powf(1.0 / d as f64);
        for j in 0..h {
            let norm: f64 = (0..d)
                .map(|k| input_weights[(j, k)].powi(2))
                .sum::<f64>()
                .sqrt();
            let scale = if norm > 0.0 { magnitude / norm } else { magnitude };
            for k in 0..d {
                input_weights[(j, k)] *= scale;
            }
            let spread = if h > 1 {
                -1.0 + 2.0 * j as f64 / (h - 1) as f64
            } else {
                0.0
            };
            input_bias[j] = magnitude * spread * input_weights[(j, 0)].signum();
        }
    }

    NarNetwork {
        d,
        h,
        input_weights,
        input_bias,
        output_weights,
        output_bias,
        normalizer,
    }
}

/// On-disk JSON form of a network: shape, layout version, flat weights,
/// and the normalizer it was trained with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub schema_version: u32,
    pub d: usize,
    pub h: usize,
    pub layout: String,
    pub weights: Vec<f64>,
    pub normalizer: Normalizer,
}

impl From<NarNetwork> for NetworkSnapshot {
    fn from(net: NarNetwork) -> Self {
        NetworkSnapshot {
            schema_version: SNAPSHOT_SCHEMA_VERSION,
            d: net.d,
            h: net.h,
            layout: WEIGHT_LAYOUT.to_string(),
            weights: net.flatten().as_slice().to_vec(),
            normalizer: net.normalizer,
        }
    }
}

impl TryFrom<NetworkSnapshot> for NarNetwork {
    type Error = ModelError;

    fn try_from(snap: NetworkSnapshot) -> Result<Self, Self::Error> {
        if snap.layout != WEIGHT_LAYOUT {
            return Err(ModelError::LayoutMismatch {
                got: snap.layout,
                expected: WEIGHT_LAYOUT.to_string(),
            });
        }
        NarNetwork::unflatten(
            &WeightVector(DVector::from_vec(snap.weights)),
            snap.d,
            snap.h,
            snap.normalizer,
        )
    }
}
