//! Lloyd's algorithm with k-means++ seeding.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::linalg::Matrix;
use crate::seed::StreamRng;

pub const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub assignments: Vec<usize>,
    pub centers: Matrix<f64>,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center; ties go to the smallest index.
fn nearest(point: &[f64], centers: &Matrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.rows() {
        let d = sq_dist(point, centers.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &Matrix<f64>, k: usize, rng: &mut StreamRng) -> Matrix<f64> {
    let n = points.rows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), points.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    pick = i;
                    break;
                }
            }
            while d2[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    points.select_rows(&chosen)
}

/// Clusters the rows of `points` into `k` groups.
pub fn kmeans(points: &Matrix<f64>, k: usize, rng_seed: u64) -> Result<ClusterResult, EvalError> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(EvalError::Config(format!("k = {k} must lie in [1, {n}]")));
    }
    let mut rng: StreamRng = rand::SeedableRng::seed_from_u64(rng_seed);
    let mut centers = plus_plus(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    let dim = points.cols();
    loop {
        let mut changed = false;
        let mut dists = vec![0.0; n];
        for i in 0..n {
            let (c, d) = nearest(points.row(i), &centers);
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
            dists[i] = d;
        }
        history.push(dists.iter().sum());
        iterations += 1;
        if !changed || iterations >= MAX_LLOYD_ITERATIONS {
            break;
        }
        let mut sums = Matrix::<f64>::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assignments[i]] += 1;
            for (s, &v) in sums.row_mut(assignments[i]).iter_mut().zip(points.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (dst, &s) in centers.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // The farthest point from its own center becomes the new center.
                let far = (0..n)
                    .map(|i| (i, sq_dist(points.row(i), centers.row(assignments[i]))))
                    .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
                    .0;
                counts[assignments[far]] -= 1;
                assignments[far] = c;
                counts[c] = 1;
                centers.row_mut(c).copy_from_slice(points.row(far));
            }
        }
    }
    let inertia = *history.last().expect("one iteration");
    Ok(ClusterResult { assignments, centers, inertia, inertia_history: history, iterations })
}
