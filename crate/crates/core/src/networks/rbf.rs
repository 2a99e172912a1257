use nalgebra::{DMatrix, DVector};

use super::{
    check_finite_loss, dropout_mask, kmeans_with_rng, loss_and_delta, shuffled, stream, AdamState, Dataset, Dense,
    LossKind, TrainConfig, TrainReport,
};
use crate::corpus::{Domain, NUM_DOMAINS};
use crate::error::{Error, Result};
use crate::vector_space::DocVector;

pub const RBF_PER_DOMAIN: usize = 50;
pub const RBF_INPUT_DROPOUT: f64 = 0.2;

/// Gaussian hidden layer over fixed prototypes followed by a trainable linear
/// output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel {
    /// One prototype per column (`dim x H`).
    pub prototypes: DMatrix<f64>,
    pub width: f64,
    pub output: Dense,
    pub input_dropout: f64,
}

impl RbfModel {
    pub fn new(prototypes: DMatrix<f64>, width: f64, output: Dense, input_dropout: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::numerical(format!(
                "RBF width must be positive and finite, got {width}"
            )));
        }
        if output.n_in() != prototypes.ncols() {
            return Err(Error::DimensionMismatch {
                expected: prototypes.ncols(),
                actual: output.n_in(),
            });
        }
        if !(0.0..1.0).contains(&input_dropout) {
            return Err(Error::config(format!(
                "input dropout must be in [0, 1), got {input_dropout}"
            )));
        }
        if prototypes.iter().any(|v| !v.is_finite()) || !output.is_finite() {
            return Err(Error::numerical("RBF parameters are not finite"));
        }
        Ok(RbfModel {
            prototypes,
            width,
            output,
            input_dropout,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.prototypes.nrows()
    }

    pub fn n_prototypes(&self) -> usize {
        self.prototypes.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.output.n_out()
    }

    fn check_input(&self, rows: usize) -> Result<()> {
        if rows != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: rows,
            });
        }
        Ok(())
    }

    /// Linear outputs for every column of `x`.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_input(x.nrows())?;
        Ok(self.output.apply(&hidden(&self.prototypes, self.width, x)))
    }

    /// Trains the output layer with Adam; prototypes and width stay fixed.
    pub fn train(&mut self, data: &Dataset, config: &TrainConfig, seed: u64) -> Result<TrainReport> {
        config.validate()?;
        if config.loss != LossKind::MeanSquaredError {
            return Err(Error::config(
                "the RBF network has linear outputs and trains with mean_squared_error only",
            ));
        }
        if data.is_empty() {
            return Err(Error::data("training data is empty"));
        }
        self.check_input(data.input_dim())?;
        if data.output_dim() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                actual: data.output_dim(),
            });
        }
        let mut adam_w = AdamState::new(self.output.weights.len(), config.adam);
        let mut adam_b = AdamState::new(self.output.bias.len(), config.adam);
        let mut shuffle_rng = stream(seed, 2);
        let mut dropout_rng = stream(seed, 3);
        let mut epoch_losses = Vec::with_capacity(config.epochs);
        let mut steps = 0;
        for epoch in 0..config.epochs {
            let order = shuffled(data.len(), &mut shuffle_rng);
            let mut total = 0.0;
            let mut batches = 0;
            for idx in order.chunks(config.batch_size) {
                let (mut x, y) = data.batch(idx);
                if self.input_dropout > 0.0 {
                    x.component_mul_assign(&dropout_mask(
                        x.nrows(),
                        x.ncols(),
                        self.input_dropout,
                        &mut dropout_rng,
                    ));
                }
                let h = hidden(&self.prototypes, self.width, &x);
                let (loss, g) = output_grads(&self.output, &h, &y);
                check_finite_loss(loss, epoch, steps)?;
                adam_w.step(self.output.weights.as_mut_slice(), g.weights.as_slice())?;
                adam_b.step(self.output.bias.as_mut_slice(), g.bias.as_slice())?;
                total += loss;
                batches += 1;
                steps += 1;
            }
            let mean = total / batches as f64;
            log::info!("rbf epoch {}/{}: loss {mean:.6}", epoch + 1, config.epochs);
            epoch_losses.push(mean);
        }
        if !self.output.is_finite() {
            return Err(Error::numerical("RBF output layer diverged"));
        }
        Ok(TrainReport { epoch_losses, steps })
    }
}

/// `exp(-|x - c_j|^2 / (2 sigma^2))` for every prototype and column of `x`.
fn hidden(prototypes: &DMatrix<f64>, width: f64, x: &DMatrix<f64>) -> DMatrix<f64> {
    let denom = 2.0 * width * width;
    let mut h = DMatrix::zeros(prototypes.ncols(), x.ncols());
    for (j, xc) in x.column_iter().enumerate() {
        let xs = xc.as_slice();
        for (i, c) in prototypes.column_iter().enumerate() {
            let d2: f64 = xs.iter().zip(c.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
            h[(i, j)] = (-d2 / denom).exp();
        }
    }
    h
}

fn output_grads(output: &Dense, h: &DMatrix<f64>, y: &DMatrix<f64>) -> (f64, Dense) {
    let o = output.apply(h);
    let (loss, delta) = loss_and_delta(LossKind::MeanSquaredError, &o, y, false);
    let grads = Dense {
        weights: &delta * h.transpose(),
        bias: delta.column_sum(),
    };
    (loss, grads)
}

/// Hidden activations of one vector.
pub fn rbf_hidden(model: &RbfModel, x: &DocVector) -> Result<DVector<f64>> {
    model.check_input(x.dim())?;
    let col = DMatrix::from_column_slice(x.dim(), 1, x.as_slice());
    Ok(hidden(&model.prototypes, model.width, &col).column(0).into_owned())
}

pub fn rbf_forward(model: &RbfModel, x: &DocVector) -> Result<Vec<f64>> {
    let h = rbf_hidden(model, x)?;
    Ok((&model.output.weights * h + &model.output.bias)
        .iter()
        .copied()
        .collect())
}

/// Batch-mean squared error and output-layer gradients, dropout disabled.
pub fn rbf_loss_and_grads(model: &RbfModel, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(f64, Dense)> {
    model.check_input(x.nrows())?;
    if y.nrows() != model.output_dim() || y.ncols() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: model.output_dim(),
            actual: y.nrows(),
        });
    }
    let h = hidden(&model.prototypes, model.width, x);
    Ok(output_grads(&model.output, &h, y))
}

pub fn rbf_loss(model: &RbfModel, data: &Dataset) -> Result<f64> {
    Ok(rbf_loss_and_grads(model, &data.inputs, &data.targets)?.0)
}

/// Runs k-means independently on each domain's vectors and concatenates the
/// centroids in domain order. With `clamp`, a domain with fewer than
/// `per_domain_k` vectors contributes one prototype per vector instead of
/// failing.
pub fn build_rbf_prototypes(
    per_domain: &[Vec<DocVector>],
    per_domain_k: usize,
    seed: u64,
    clamp: bool,
) -> Result<DMatrix<f64>> {
    if per_domain.len() != NUM_DOMAINS {
        return Err(Error::DimensionMismatch {
            expected: NUM_DOMAINS,
            actual: per_domain.len(),
        });
    }
    let dim = per_domain
        .iter()
        .find_map(|v| v.first())
        .map(DocVector::dim)
        .ok_or_else(|| Error::data("no vectors for RBF prototypes"))?;
    let mut blocks = Vec::with_capacity(NUM_DOMAINS);
    for (i, vectors) in per_domain.iter().enumerate() {
        let domain = Domain::from_index(i).expect("domain index");
        let mut k = per_domain_k;
        if vectors.len() < k {
            if !clamp || vectors.is_empty() {
                return Err(Error::data(format!(
                    "domain {} has {} training vectors, need {} for RBF prototypes",
                    domain.name(),
                    vectors.len(),
                    per_domain_k
                )));
            }
            log::warn!(
                "domain {} has only {} vectors; using that many prototypes instead of {per_domain_k}",
                domain.name(),
                vectors.len()
            );
            k = vectors.len();
        }
        let mut points = DMatrix::zeros(dim, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.dim(),
                });
            }
            points.set_column(j, &DVector::from_column_slice(v.as_slice()));
        }
        let mut rng = stream(seed, 10 + i as u64);
        blocks.push(kmeans_with_rng(&points, k, &mut rng)?.centroids);
    }
    let total: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(dim, total);
    let mut at = 0;
    for b in blocks {
        out.columns_mut(at, b.ncols()).copy_from(&b);
        at += b.ncols();
    }
    Ok(out)
}

/// `d_max / sqrt(2 H)` where `d_max` is the largest pairwise distance among
/// the `H` prototypes.
pub fn compute_rbf_width(prototypes: &DMatrix<f64>) -> Result<f64> {
    let h = prototypes.ncols();
    if h < 2 {
        return Err(Error::data("RBF width needs at least 2 prototypes"));
    }
    let mut d_max2: f64 = 0.0;
    for i in 0..h {
        let a = prototypes.column(i);
        for j in (i + 1)..h {
            let d2: f64 = a
                .iter()
                .zip(prototypes.column(j).iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            d_max2 = d_max2.max(d2);
        }
    }
    if d_max2 == 0.0 {
        return Err(Error::numerical("all RBF prototypes coincide; width would be zero"));
    }
    Ok(d_max2.sqrt() / (2.0 * h as f64).sqrt())
}

/// Fits the output layer of an RBF network over the given prototypes.
pub fn train_rbf(
    prototypes: DMatrix<f64>,
    width: f64,
    data: &Dataset,
    config: &TrainConfig,
    seed: u64,
) -> Result<(RbfModel, TrainReport)> {
    let mut rng = stream(seed, 1);
    let output = Dense::glorot(prototypes.ncols(), data.output_dim(), &mut rng);
    let mut model = RbfModel::new(prototypes, width, output, RBF_INPUT_DROPOUT)?;
    let report = model.train(data, config, seed)?;
    Ok((model, report))
}
