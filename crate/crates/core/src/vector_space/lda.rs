use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::DocVector;
use crate::corpus::Domain;
use crate::error::{Error, Result};

const WITHIN_RIDGE: f64 = 1e-6;
/// Discriminants whose between/within variance ratio is below this carry no
/// class separation and are zeroed.
const MIN_EIGENVALUE: f64 = 1e-10;

/// Fitted two-component linear discriminant projection.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaProjection {
    pub mean: DVector<f64>,
    /// `dim x 2`; each column is a discriminant direction scaled so that
    /// `w^T S_w w = 1` (or zero when degenerate).
    pub directions: DMatrix<f64>,
    pub eigenvalues: [f64; 2],
}

impl LdaProjection {
    pub fn fit(vectors: &[DocVector], labels: &[Domain]) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.len(),
                actual: labels.len(),
            });
        }
        let dim = vectors
            .first()
            .map(DocVector::dim)
            .ok_or_else(|| Error::data("LDA needs at least one vector"))?;
        if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: v.dim(),
            });
        }
        let mut classes: BTreeMap<Domain, Vec<usize>> = BTreeMap::new();
        for (i, d) in labels.iter().enumerate() {
            classes.entry(*d).or_default().push(i);
        }
        if classes.len() < 2 {
            return Err(Error::data(format!(
                "LDA needs at least 2 classes, got {}",
                classes.len()
            )));
        }

        let col = |i: usize| DVector::from_column_slice(vectors[i].as_slice());
        let n = vectors.len() as f64;
        let mean = (0..vectors.len()).fold(DVector::zeros(dim), |acc, i| acc + col(i)) / n;

        let mut within = DMatrix::identity(dim, dim) * WITHIN_RIDGE;
        let mut between = DMatrix::zeros(dim, dim);
        for members in classes.values() {
            let class_mean = members.iter().fold(DVector::zeros(dim), |acc, &i| acc + col(i)) / members.len() as f64;
            for &i in members {
                let d = col(i) - &class_mean;
                within.ger(1.0, &d, &d, 1.0);
            }
            let d = &class_mean - &mean;
            between.ger(members.len() as f64, &d, &d, 1.0);
        }

        // Generalized symmetric problem S_b w = lambda S_w w via S_w = L L^T.
        let chol = within
            .cholesky()
            .ok_or_else(|| Error::numerical("within-class scatter is not positive definite"))?;
        let l = chol.l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::numerical("singular Cholesky factor"))?;
        let m = &l_inv * &between * l_inv.transpose();
        let m = (&m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

        let mut directions = DMatrix::zeros(dim, 2);
        let mut eigenvalues = [0.0; 2];
        let l_inv_t = l_inv.transpose();
        for (slot, &idx) in order.iter().take(2).enumerate() {
            let lambda = eig.eigenvalues[idx];
            if lambda <= MIN_EIGENVALUE {
                continue;
            }
            let mut w = &l_inv_t * eig.eigenvectors.column(idx);
            let pivot = w
                .iter()
                .copied()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if pivot < 0.0 {
                w.neg_mut();
            }
            directions.set_column(slot, &w);
            eigenvalues[slot] = lambda;
        }
        Ok(LdaProjection {
            mean,
            directions,
            eigenvalues,
        })
    }

    pub fn transform(&self, v: &DocVector) -> Result<[f64; 2]> {
        if v.dim() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: v.dim(),
            });
        }
        let centered = DVector::from_column_slice(v.as_slice()) - &self.mean;
        let out = self.directions.tr_mul(&centered);
        Ok([out[0], out[1]])
    }
}

/// Projects each vector onto the top two discriminants of `S_w^-1 S_b`.
pub fn lda_2d(vectors: &[DocVector], labels: &[Domain]) -> Result<Vec<[f64; 2]>> {
    let lda = LdaProjection::fit(vectors, labels)?;
    vectors.iter().map(|v| lda.transform(v)).collect()
}
