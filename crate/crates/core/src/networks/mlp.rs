use nalgebra::DMatrix;

use super::{
    check_finite_loss, dropout_mask, loss_and_delta, shuffled, sigmoid, stream, AdamState, Dataset, Dense, Mode,
    TrainConfig, TrainReport,
};
use crate::corpus::NUM_DOMAINS;
use crate::error::{Error, Result};
use crate::vector_space::DocVector;

pub const MLP_HIDDEN: usize = 100;
pub const MLP_DROPOUT: [f64; 2] = [0.2, 0.5];

/// Three affine layers with ReLU, ReLU, sigmoid activations and inverted
/// dropout after each hidden block.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layers: [Dense; 3],
    pub dropout: [f64; 2],
}

/// Gradients with the same shapes as [`MlpModel::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub layers: [Dense; 3],
}

struct Cache {
    a1: DMatrix<f64>,
    h1: DMatrix<f64>,
    a2: DMatrix<f64>,
    h2: DMatrix<f64>,
    z: DMatrix<f64>,
}

fn relu(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.map(|v| v.max(0.0))
}

impl MlpModel {
    /// Glorot-initialized network `input -> hidden -> hidden -> outputs`.
    pub fn new(input_dim: usize, hidden: usize, outputs: usize, dropout: [f64; 2], seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden == 0 || outputs == 0 {
            return Err(Error::config("MLP layer sizes must be positive"));
        }
        if dropout.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(Error::config(format!(
                "dropout rates must be in [0, 1), got {dropout:?}"
            )));
        }
        let mut rng = stream(seed, 1);
        let l1 = Dense::glorot(input_dim, hidden, &mut rng);
        let l2 = Dense::glorot(hidden, hidden, &mut rng);
        let l3 = Dense::glorot(hidden, outputs, &mut rng);
        Ok(MlpModel {
            layers: [l1, l2, l3],
            dropout,
        })
    }

    /// The 100-100-7 architecture with dropout 0.2 / 0.5.
    pub fn standard(input_dim: usize, seed: u64) -> Result<Self> {
        Self::new(input_dim, MLP_HIDDEN, NUM_DOMAINS, MLP_DROPOUT, seed)
    }

    /// Rebuilds a model from stored layers, checking that shapes chain.
    pub fn from_layers(layers: [Dense; 3], dropout: [f64; 2]) -> Result<Self> {
        for w in layers.windows(2) {
            if w[0].n_out() != w[1].n_in() {
                return Err(Error::DimensionMismatch {
                    expected: w[0].n_out(),
                    actual: w[1].n_in(),
                });
            }
        }
        for l in &layers {
            if l.bias.len() != l.n_out() {
                return Err(Error::DimensionMismatch {
                    expected: l.n_out(),
                    actual: l.bias.len(),
                });
            }
        }
        let model = MlpModel { layers, dropout };
        if !model.is_finite() {
            return Err(Error::numerical("MLP parameters are not finite"));
        }
        Ok(model)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[2].n_out()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(Dense::is_finite)
    }

    fn forward_cached(&self, x: &DMatrix<f64>, masks: Option<&[DMatrix<f64>; 2]>) -> Cache {
        let a1 = self.layers[0].apply(x);
        let mut h1 = relu(&a1);
        if let Some(m) = masks {
            h1.component_mul_assign(&m[0]);
        }
        let a2 = self.layers[1].apply(&h1);
        let mut h2 = relu(&a2);
        if let Some(m) = masks {
            h2.component_mul_assign(&m[1]);
        }
        let z = self.layers[2].apply(&h2);
        Cache { a1, h1, a2, h2, z }
    }

    fn masks(&self, batch: usize, rng: &mut rand_chacha::ChaCha8Rng) -> [DMatrix<f64>; 2] {
        [
            dropout_mask(self.layers[0].n_out(), batch, self.dropout[0], rng),
            dropout_mask(self.layers[1].n_out(), batch, self.dropout[1], rng),
        ]
    }

    /// Sigmoid outputs for every column of `x` in inference mode.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.nrows(),
            });
        }
        Ok(self.forward_cached(x, None).z.map(sigmoid))
    }

    /// Minibatch Adam for exactly `epochs * ceil(N / batch)` steps.
    pub fn train(&mut self, data: &Dataset, config: &TrainConfig, seed: u64) -> Result<TrainReport> {
        config.validate()?;
        if data.is_empty() {
            return Err(Error::data("training data is empty"));
        }
        if data.input_dim() != self.input_dim() || data.output_dim() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: data.input_dim(),
            });
        }
        let mut adam: Vec<AdamState> = self
            .layers
            .iter()
            .flat_map(|l| [l.weights.len(), l.bias.len()])
            .map(|n| AdamState::new(n, config.adam))
            .collect();
        let mut shuffle_rng = stream(seed, 2);
        let mut dropout_rng = stream(seed, 3);
        let mut epoch_losses = Vec::with_capacity(config.epochs);
        let mut steps = 0;
        for epoch in 0..config.epochs {
            let order = shuffled(data.len(), &mut shuffle_rng);
            let mut total = 0.0;
            let mut batches = 0;
            for idx in order.chunks(config.batch_size) {
                let (x, y) = data.batch(idx);
                let masks = self.masks(idx.len(), &mut dropout_rng);
                let (loss, grads) = loss_and_grads(self, &x, &y, config.loss, Some(&masks));
                check_finite_loss(loss, epoch, steps)?;
                for (i, (layer, g)) in self.layers.iter_mut().zip(&grads.layers).enumerate() {
                    adam[2 * i].step(layer.weights.as_mut_slice(), g.weights.as_slice())?;
                    adam[2 * i + 1].step(layer.bias.as_mut_slice(), g.bias.as_slice())?;
                }
                total += loss;
                batches += 1;
                steps += 1;
            }
            let mean = total / batches as f64;
            log::info!("mlp epoch {}/{}: loss {mean:.6}", epoch + 1, config.epochs);
            epoch_losses.push(mean);
        }
        if !self.is_finite() {
            return Err(Error::numerical("MLP parameters diverged"));
        }
        Ok(TrainReport { epoch_losses, steps })
    }
}

fn loss_and_grads(
    model: &MlpModel,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    loss: super::LossKind,
    masks: Option<&[DMatrix<f64>; 2]>,
) -> (f64, MlpGrads) {
    let c = model.forward_cached(x, masks);
    let (value, dz) = loss_and_delta(loss, &c.z, y, true);
    let outer = |delta: &DMatrix<f64>, input: &DMatrix<f64>| Dense {
        weights: delta * input.transpose(),
        bias: delta.column_sum(),
    };
    let g3 = outer(&dz, &c.h2);
    let mut d2 = model.layers[2].weights.tr_mul(&dz);
    if let Some(m) = masks {
        d2.component_mul_assign(&m[1]);
    }
    d2.zip_apply(&c.a2, |d, a| {
        if a <= 0.0 {
            *d = 0.0
        }
    });
    let g2 = outer(&d2, &c.h1);
    let mut d1 = model.layers[1].weights.tr_mul(&d2);
    if let Some(m) = masks {
        d1.component_mul_assign(&m[0]);
    }
    d1.zip_apply(&c.a1, |d, a| {
        if a <= 0.0 {
            *d = 0.0
        }
    });
    let g1 = outer(&d1, x);
    (value, MlpGrads { layers: [g1, g2, g3] })
}

/// Batch-mean loss and analytic gradients with dropout disabled. `x` and `y`
/// hold one sample per column.
pub fn mlp_loss_and_grads(
    model: &MlpModel,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    loss: super::LossKind,
) -> Result<(f64, MlpGrads)> {
    if x.nrows() != model.input_dim() || y.nrows() != model.output_dim() || x.ncols() != y.ncols() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            actual: x.nrows(),
        });
    }
    Ok(loss_and_grads(model, x, y, loss, None))
}

/// Inference-mode loss over a whole dataset.
pub fn mlp_loss(model: &MlpModel, data: &Dataset, loss: super::LossKind) -> Result<f64> {
    Ok(mlp_loss_and_grads(model, &data.inputs, &data.targets, loss)?.0)
}

/// Scores for one vector. Train mode applies inverted dropout drawn from the
/// given stream.
pub fn mlp_forward(model: &MlpModel, x: &DocVector, mode: Mode<'_>) -> Result<Vec<f64>> {
    if x.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            actual: x.dim(),
        });
    }
    let col = DMatrix::from_column_slice(x.dim(), 1, x.as_slice());
    let z = match mode {
        Mode::Infer => model.forward_cached(&col, None).z,
        Mode::Train(rng) => {
            let masks = model.masks(1, rng);
            model.forward_cached(&col, Some(&masks)).z
        }
    };
    Ok(z.iter().map(|v| sigmoid(*v)).collect())
}

/// Trains the standard architecture on `data`.
pub fn train_mlp(data: &Dataset, config: &TrainConfig, seed: u64) -> Result<(MlpModel, TrainReport)> {
    if data.is_empty() {
        return Err(Error::data("training data is empty"));
    }
    let mut model = MlpModel::new(data.input_dim(), MLP_HIDDEN, data.output_dim(), MLP_DROPOUT, seed)?;
    let report = model.train(data, config, seed)?;
    Ok((model, report))
}
