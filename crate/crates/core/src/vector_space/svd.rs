//! Truncated SVD of a sparse document-term matrix.
//!
//! When `min(N, V)` is within the oversampled target rank the decomposition
//! is computed exactly from the dense matrix. Otherwise a seeded randomized
//! range finder with power iterations (Halko, Martinsson & Tropp) reduces the
//! problem to a dense `V x l` SVD, which is exact for matrices of rank `<= l`.

use nalgebra::{DMatrix, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::tfidf::SparseVector;
use super::DocVector;
use crate::error::{Error, Result};

const OVERSAMPLE: usize = 10;
const POWER_ITERATIONS: usize = 6;

/// Row-sparse `N x V` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub n_cols: usize,
    pub rows: Vec<SparseVector>,
}

impl SparseMatrix {
    pub fn new(n_cols: usize, rows: Vec<SparseVector>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.dim != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                actual: r.dim,
            });
        }
        Ok(SparseMatrix { n_cols, rows })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                SparseVector::from_pairs(
                    m.ncols(),
                    (0..m.ncols()).map(|j| (j, m[(i, j)])).filter(|(_, v)| *v != 0.0),
                )
            })
            .collect();
        SparseMatrix {
            n_cols: m.ncols(),
            rows,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows(), self.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row.iter() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.values.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// `A * X` for dense `X` (`V x c`).
    fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n_rows(), x.ncols());
        for (i, row) in self.rows.iter().enumerate() {
            for c in 0..x.ncols() {
                let col = x.column(c);
                out[(i, c)] = row.iter().map(|(j, v)| v * col[j]).sum();
            }
        }
        out
    }

    /// `A^T * Y` for dense `Y` (`N x c`).
    fn tr_mul_dense(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n_cols, y.ncols());
        for c in 0..y.ncols() {
            let ycol = y.column(c);
            let mut ocol = out.column_mut(c);
            for (i, row) in self.rows.iter().enumerate() {
                let yi = ycol[i];
                if yi != 0.0 {
                    for (j, v) in row.iter() {
                        ocol[j] += v * yi;
                    }
                }
            }
        }
        out
    }
}

/// Top-`k` right singular vectors (rows of `components`) and singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdProjection {
    /// `k x V`, orthonormal rows.
    pub components: DMatrix<f64>,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
}

impl SvdProjection {
    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.components.ncols()
    }

    pub fn project(&self, v: &SparseVector) -> Result<DocVector> {
        if v.dim != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: v.dim,
            });
        }
        let mut out = vec![0.0; self.k()];
        for (j, x) in v.iter() {
            for (o, c) in out.iter_mut().zip(self.components.column(j).iter()) {
                *o += c * x;
            }
        }
        Ok(DocVector(out))
    }

    pub fn project_dense(&self, v: &[f64]) -> Result<DocVector> {
        if v.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: v.len(),
            });
        }
        let x = nalgebra::DVectorView::from_slice(v, v.len());
        Ok(DocVector((&self.components * x).iter().copied().collect()))
    }
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Right singular vectors of `bt^T` are the left singular vectors of `bt`.
fn right_vectors_of_transpose(bt: DMatrix<f64>, k: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let svd = SVD::try_new(bt, true, false, f64::EPSILON, 0).ok_or_else(|| Error::numerical("SVD did not converge"))?;
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let order = &order[..k];
    let mut components = DMatrix::zeros(k, u.nrows());
    for (r, &c) in order.iter().enumerate() {
        let col = u.column(c);
        // Sign convention: largest-magnitude entry positive.
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (j, x) in col.iter().enumerate() {
            components[(r, j)] = sign * x;
        }
    }
    let values = order.iter().map(|&c| svd.singular_values[c]).collect();
    Ok((components, values))
}

/// Truncated SVD keeping `k` components; `k` is clamped to `min(N, V)`.
pub fn fit_svd(matrix: &SparseMatrix, k: usize, seed: u64) -> Result<SvdProjection> {
    let (n, v) = (matrix.n_rows(), matrix.n_cols);
    if n == 0 || v == 0 {
        return Err(Error::data("cannot decompose an empty matrix"));
    }
    if k == 0 {
        return Err(Error::config("svd k must be at least 1"));
    }
    if matrix.rows.iter().all(|r| r.values.iter().all(|x| *x == 0.0)) {
        return Err(Error::numerical("cannot decompose an all-zero matrix"));
    }
    let rank_bound = n.min(v);
    let k = if k > rank_bound {
        log::warn!("svd: k={k} exceeds min(N={n}, V={v}); clamping to {rank_bound}");
        rank_bound
    } else {
        k
    };

    let (components, singular_values) = if rank_bound <= k + OVERSAMPLE {
        right_vectors_of_transpose(matrix.to_dense().transpose(), k)?
    } else {
        randomized(matrix, k, seed)?
    };

    if singular_values.iter().any(|s| !s.is_finite()) || components.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("SVD produced non-finite values"));
    }
    Ok(SvdProjection {
        components,
        singular_values,
    })
}

fn randomized(matrix: &SparseMatrix, k: usize, seed: u64) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let l = (k + OVERSAMPLE).min(matrix.n_rows().min(matrix.n_cols));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DMatrix::from_fn(matrix.n_cols, l, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormal_basis(matrix.mul_dense(&omega));
    for _ in 0..POWER_ITERATIONS {
        let z = orthonormal_basis(matrix.tr_mul_dense(&q));
        q = orthonormal_basis(matrix.mul_dense(&z));
    }
    // B = Q^T A, so B^T = A^T Q (V x l).
    let bt = matrix.tr_mul_dense(&q);
    right_vectors_of_transpose(bt, k)
}
