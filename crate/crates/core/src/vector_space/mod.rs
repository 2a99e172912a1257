//! TF-IDF over uni/bi/trigrams, truncated SVD, cosine similarity and a
//! two-component LDA projection for visualization.

mod lda;
mod svd;
mod tfidf;

use crate::error::{Error, Result};

pub use lda::{lda_2d, LdaProjection};
pub use svd::{fit_svd, SparseMatrix, SvdProjection};
pub use tfidf::{fit_tfidf, smoothed_idf, SparseVector, TfidfModel, Vectorized, Vocabulary};

/// Dense document representation in the reduced space.
#[derive(Debug, Clone, PartialEq)]
pub struct DocVector(pub Vec<f64>);

impl DocVector {
    pub fn zeros(dim: usize) -> Self {
        DocVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| *x == 0.0)
    }
}

/// `u . v / (|u| |v|)`; errors on a zero-norm input.
pub fn cosine(u: &DocVector, v: &DocVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: v.dim(),
        });
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::numerical("cosine of a zero-norm vector"));
    }
    let dot: f64 = u.0.iter().zip(&v.0).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        let u = DocVector(vec![0.3, -2.0, 1.0]);
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        let e1 = DocVector(vec![1.0, 0.0]);
        let e2 = DocVector(vec![0.0, 1.0]);
        assert_eq!(cosine(&e1, &e2).unwrap(), 0.0);
        let v = DocVector(vec![1.0, 1.0]);
        assert!((cosine(&e1, &v).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn cosine_rejects_zero_and_mismatch() {
        assert!(cosine(&DocVector::zeros(2), &DocVector(vec![1.0, 0.0])).is_err());
        assert!(cosine(&DocVector(vec![1.0]), &DocVector(vec![1.0, 0.0])).is_err());
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric(
            u in proptest::collection::vec(-5.0f64..5.0, 4),
            v in proptest::collection::vec(-5.0f64..5.0, 4),
        ) {
            let (u, v) = (DocVector(u), DocVector(v));
            prop_assume!(u.norm() > 1e-9 && v.norm() > 1e-9);
            let a = cosine(&u, &v).unwrap();
            let b = cosine(&v, &u).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }
}
