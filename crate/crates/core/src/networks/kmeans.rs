use nalgebra::DMatrix;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const KMEANS_MAX_ITER: usize = 300;
pub const KMEANS_TOL: f64 = 1e-6;

/// Fitted k-means clustering. `centroids` holds one centroid per column.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: DMatrix<f64>,
    pub inertia: f64,
    /// Inertia of the k-means++ seeds followed by the value after each Lloyd
    /// iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid per point (ties to the lowest index) and the inertia.
fn assign(points: &DMatrix<f64>, centroids: &DMatrix<f64>, labels: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, p) in points.column_iter().enumerate() {
        let p = p.as_slice();
        let mut best = (0, f64::INFINITY);
        for (j, c) in centroids.column_iter().enumerate() {
            let d = sq_dist(p, c.as_slice());
            if d < best.1 {
                best = (j, d);
            }
        }
        labels[i] = best.0;
        inertia += best.1;
    }
    inertia
}

fn plus_plus(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.ncols();
    let mut centroids = DMatrix::zeros(points.nrows(), k);
    let first = rng.random_range(0..n);
    centroids.set_column(0, &points.column(first));
    let mut d2: Vec<f64> = points
        .column_iter()
        .map(|p| sq_dist(p.as_slice(), centroids.column(0).as_slice()))
        .collect();
    for j in 1..k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // Every point already coincides with a centroid.
            Err(_) => rng.random_range(0..n),
        };
        centroids.set_column(j, &points.column(next));
        for (i, p) in points.column_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p.as_slice(), centroids.column(j).as_slice()));
        }
    }
    centroids
}

/// k-means++ seeding followed by Lloyd iterations until the inertia improves
/// by less than [`KMEANS_TOL`] or [`KMEANS_MAX_ITER`] iterations. `points`
/// holds one point per column. Empty clusters keep their previous centroid.
pub fn kmeans_with_rng(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Result<KMeans> {
    let n = points.ncols();
    if k == 0 {
        return Err(Error::config("k-means needs k >= 1"));
    }
    if n < k {
        return Err(Error::data(format!("k-means needs at least k={k} points, got {n}")));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::data("k-means input contains non-finite values"));
    }
    let dim = points.nrows();
    let mut centroids = plus_plus(points, k, rng);
    let mut labels = vec![0usize; n];
    let mut inertia = assign(points, &centroids, &mut labels);
    let mut history = vec![inertia];
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITER {
        iterations += 1;
        let mut sums = DMatrix::zeros(dim, k);
        let mut counts = vec![0usize; k];
        for (i, p) in points.column_iter().enumerate() {
            let mut col = sums.column_mut(labels[i]);
            col += p;
            counts[labels[i]] += 1;
        }
        for (j, &count) in counts.iter().enumerate() {
            if count > 0 {
                let mean = sums.column(j) / count as f64;
                centroids.set_column(j, &mean);
            }
        }
        let next = assign(points, &centroids, &mut labels);
        history.push(next);
        let improvement = inertia - next;
        inertia = next;
        if improvement < KMEANS_TOL {
            break;
        }
    }
    Ok(KMeans {
        centroids,
        inertia,
        history,
        iterations,
    })
}

pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> Result<KMeans> {
    let mut rng = super::stream(seed, 0);
    kmeans_with_rng(points, k, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn pts(cols: &[&[f64]]) -> DMatrix<f64> {
        let dim = cols[0].len();
        DMatrix::from_fn(dim, cols.len(), |r, c| cols[c][r])
    }

    #[test]
    fn square_corners_k4() {
        let p = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let km = kmeans(&p, 4, 1).unwrap();
        assert_eq!(km.inertia, 0.0);
        for c in p.column_iter() {
            assert!(km.centroids.column_iter().any(|k| k == c));
        }
    }

    #[test]
    fn k1_is_mean() {
        let p = pts(&[&[0.0, 2.0], &[4.0, 0.0], &[2.0, 7.0]]);
        let km = kmeans(&p, 1, 3).unwrap();
        assert!((km.centroids[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((km.centroids[(1, 0)] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let p = pts(&[&[0.0], &[1.0]]);
        assert!(kmeans(&p, 3, 0).is_err());
        assert!(kmeans(&p, 0, 0).is_err());
    }

    #[test]
    fn duplicate_points_do_not_break_seeding() {
        let p = DMatrix::from_element(2, 6, 1.0);
        let km = kmeans(&p, 4, 9).unwrap();
        assert_eq!(km.inertia, 0.0);
        assert!(km.centroids.column_iter().all(|c| c[0] == 1.0 && c[1] == 1.0));
    }

    #[test]
    fn deterministic_in_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = DMatrix::from_fn(3, 40, |_, _| rng.random_range(-1.0..1.0));
        assert_eq!(kmeans(&p, 5, 11).unwrap(), kmeans(&p, 5, 11).unwrap());
    }

    proptest! {
        #[test]
        fn inertia_never_increases(seed in 0u64..10_000, n in 5usize..40, k in 1usize..5, dim in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = DMatrix::from_fn(dim, n, |_, _| rng.random_range(-3.0..3.0));
            let km = kmeans(&p, k, seed).unwrap();
            for w in km.history.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            prop_assert!(km.iterations <= KMEANS_MAX_ITER);
        }
    }
}
