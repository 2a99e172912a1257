//! Multilayer perceptron and RBF network scorers, Adam, inverted dropout and
//! k-means prototype selection. All randomness comes from seeded ChaCha8
//! streams so training is bit-reproducible.

mod adam;
mod kmeans;
mod mlp;
mod rbf;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Domain, NUM_DOMAINS};
use crate::error::{Error, Result};
use crate::vector_space::DocVector;

pub use adam::{AdamConfig, AdamState};
pub use kmeans::{kmeans, kmeans_with_rng, KMeans, KMEANS_MAX_ITER, KMEANS_TOL};
pub use mlp::{mlp_forward, mlp_loss, mlp_loss_and_grads, train_mlp, MlpGrads, MlpModel, MLP_DROPOUT, MLP_HIDDEN};
pub use rbf::{
    build_rbf_prototypes, compute_rbf_width, rbf_forward, rbf_hidden, rbf_loss, rbf_loss_and_grads, train_rbf,
    RbfModel, RBF_INPUT_DROPOUT, RBF_PER_DOMAIN,
};

/// Train mode draws dropout masks from the given stream; infer mode is
/// deterministic.
pub enum Mode<'a> {
    Infer,
    Train(&'a mut ChaCha8Rng),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `-sum_c y_c ln sigmoid(z_c)`; only the true-class terms contribute.
    CategoricalCrossEntropy,
    /// `-sum_c [y_c ln p_c + (1 - y_c) ln(1 - p_c)]` over the sigmoid outputs.
    BinaryCrossEntropy,
    /// Mean over outputs of `(o_c - y_c)^2`.
    MeanSquaredError,
}

/// Adam step size used for the RBF output layer.
pub const RBF_LEARNING_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub loss: LossKind,
    pub adam: AdamConfig,
}

impl TrainConfig {
    /// Binary cross-entropy over the seven sigmoid outputs. The true-class
    /// only loss is kept as [`LossKind::CategoricalCrossEntropy`]; it never
    /// pushes the other outputs down, so they all saturate near 1.
    pub fn mlp_default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 128,
            loss: LossKind::BinaryCrossEntropy,
            adam: AdamConfig::default(),
        }
    }

    /// Only the linear output layer is trained, which needs a larger step
    /// than the default to converge in 50 epochs on a few thousand vectors.
    pub fn rbf_default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 128,
            loss: LossKind::MeanSquaredError,
            adam: AdamConfig {
                learning_rate: RBF_LEARNING_RATE,
                ..AdamConfig::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        self.adam.validate()
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::mlp_default()
    }
}

/// Result of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean minibatch loss per epoch (train mode, with dropout).
    pub epoch_losses: Vec<f64>,
    pub steps: usize,
}

/// Column-per-sample inputs and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: DMatrix<f64>,
    pub targets: DMatrix<f64>,
}

impl Dataset {
    pub fn new(inputs: &[DocVector], targets: &[Vec<f64>]) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::data("training data is empty"));
        }
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                actual: targets.len(),
            });
        }
        let dim = inputs[0].dim();
        let n_out = targets[0].len();
        let mut x = DMatrix::zeros(dim, inputs.len());
        let mut y = DMatrix::zeros(n_out, inputs.len());
        for (j, (xi, yi)) in inputs.iter().zip(targets).enumerate() {
            if xi.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: xi.dim(),
                });
            }
            if yi.len() != n_out {
                return Err(Error::DimensionMismatch {
                    expected: n_out,
                    actual: yi.len(),
                });
            }
            x.set_column(j, &DVector::from_column_slice(xi.as_slice()));
            y.set_column(j, &DVector::from_column_slice(yi));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::data("training data contains non-finite values"));
        }
        Ok(Dataset { inputs: x, targets: y })
    }

    /// One-hot targets over the seven risk-factor domains.
    pub fn from_labeled(inputs: &[DocVector], labels: &[Domain]) -> Result<Self> {
        let targets = labels.iter().map(|d| one_hot(*d)).collect::<Result<Vec<_>>>()?;
        Self::new(inputs, &targets)
    }

    pub fn len(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.targets.nrows()
    }

    pub(crate) fn batch(&self, idx: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.inputs.select_columns(idx), self.targets.select_columns(idx))
    }
}

pub fn one_hot(domain: Domain) -> Result<Vec<f64>> {
    if domain.is_other() {
        return Err(Error::data("Other is not a trainable target"));
    }
    let mut y = vec![0.0; NUM_DOMAINS];
    y[domain.index()] = 1.0;
    Ok(y)
}

/// Affine layer `W x + b` with `W` stored as `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Dense {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Dense {
            weights: DMatrix::zeros(n_out, n_in),
            bias: DVector::zeros(n_out),
        }
    }

    /// Glorot uniform weights, zero bias.
    pub fn glorot(n_in: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        let weights = DMatrix::from_fn(n_out, n_in, |_, _| rng.random_range(-limit..=limit));
        Dense {
            weights,
            bias: DVector::zeros(n_out),
        }
    }

    pub fn n_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.weights.nrows()
    }

    /// Applies the layer to every column of `x`.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = &self.weights * x;
        for mut col in z.column_iter_mut() {
            col += &self.bias;
        }
        z
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(self.bias.iter()).all(|v| v.is_finite())
    }
}

/// Inverted dropout mask: each entry is 0 with probability `rate`, else
/// `1 / (1 - rate)`.
pub fn dropout_mask(rows: usize, cols: usize, rate: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    if rate <= 0.0 {
        return DMatrix::from_element(rows, cols, 1.0);
    }
    let keep = 1.0 / (1.0 - rate);
    DMatrix::from_fn(rows, cols, |_, _| if rng.random_bool(rate) { 0.0 } else { keep })
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Loss and its gradient with respect to the pre-activations `z` for one
/// batch, averaged over columns. `z` is the output pre-activation for the
/// sigmoid losses and the raw output for mean squared error.
pub(crate) fn loss_and_delta(
    kind: LossKind,
    z: &DMatrix<f64>,
    y: &DMatrix<f64>,
    sigmoid_out: bool,
) -> (f64, DMatrix<f64>) {
    let n = z.ncols() as f64;
    let c = z.nrows() as f64;
    let mut delta = DMatrix::zeros(z.nrows(), z.ncols());
    let mut loss = 0.0;
    for ((d, &zi), &yi) in delta.iter_mut().zip(z.iter()).zip(y.iter()) {
        let (l, g) = match (kind, sigmoid_out) {
            (LossKind::CategoricalCrossEntropy, true) => (yi * softplus(-zi), yi * (sigmoid(zi) - 1.0)),
            (LossKind::BinaryCrossEntropy, true) => (softplus(zi) - yi * zi, sigmoid(zi) - yi),
            (LossKind::MeanSquaredError, true) => {
                let p = sigmoid(zi);
                ((p - yi).powi(2) / c, 2.0 * (p - yi) * p * (1.0 - p) / c)
            }
            (LossKind::MeanSquaredError, false) => ((zi - yi).powi(2) / c, 2.0 * (zi - yi) / c),
            (_, false) => unreachable!("cross-entropy losses need sigmoid outputs"),
        };
        loss += l;
        *d = g / n;
    }
    (loss / n, delta)
}

pub(crate) fn check_finite_loss(loss: f64, epoch: usize, step: usize) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::numerical(format!(
            "non-finite loss {loss} at epoch {epoch}, step {step}"
        )))
    }
}

/// Seeded streams so that init, shuffling and dropout are independent.
pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub(crate) fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}
