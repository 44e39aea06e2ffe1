//! Classification and clustering agreement metrics.

use std::collections::HashMap;

use super::{check_lengths, EvalError};
use crate::linalg::Matrix;

pub fn accuracy(truth: &[usize], pred: &[usize]) -> Result<f64, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    if truth.is_empty() {
        return Err(EvalError::Config("accuracy of an empty set".into()));
    }
    Ok(truth.iter().zip(pred).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64)
}

struct Contingency {
    cells: HashMap<(usize, usize), usize>,
    rows: HashMap<usize, usize>,
    cols: HashMap<usize, usize>,
    n: usize,
}

fn contingency(a: &[usize], b: &[usize]) -> Contingency {
    let mut cells = HashMap::new();
    let mut rows = HashMap::new();
    let mut cols = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *cells.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    Contingency { cells, rows, cols, n: a.len() }
}

/// Counts sorted by key so floating-point sums do not depend on hash order.
fn sorted_counts<K: Ord + Copy>(m: &HashMap<K, usize>) -> Vec<usize> {
    let mut v: Vec<(K, usize)> = m.iter().map(|(&k, &c)| (k, c)).collect();
    v.sort_unstable_by_key(|&(k, _)| k);
    v.into_iter().map(|(_, c)| c).collect()
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts.iter().filter(|&&c| c > 0).map(|&c| -(c as f64 / n) * (c as f64 / n).ln()).sum()
}

/// Mutual information normalized by the arithmetic mean of both entropies.
pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    if truth.is_empty() {
        return Err(EvalError::Config("nmi of an empty labelling".into()));
    }
    let t = contingency(truth, pred);
    let n = t.n as f64;
    let hu = entropy(&sorted_counts(&t.rows), n);
    let hv = entropy(&sorted_counts(&t.cols), n);
    if hu == 0.0 && hv == 0.0 {
        return Ok(1.0);
    }
    if hu == 0.0 || hv == 0.0 {
        return Ok(0.0);
    }
    let mut cells: Vec<((usize, usize), usize)> = t.cells.iter().map(|(&k, &c)| (k, c)).collect();
    cells.sort_unstable_by_key(|&(k, _)| k);
    let mi: f64 = cells
        .iter()
        .map(|&((x, y), c)| {
            let pxy = c as f64 / n;
            pxy * (c as f64 * n / (t.rows[&x] as f64 * t.cols[&y] as f64)).ln()
        })
        .sum();
    Ok((mi / ((hu + hv) / 2.0)).clamp(0.0, 1.0))
}

fn pairs(c: usize) -> u64 {
    (c as u64) * (c as u64).saturating_sub(1) / 2
}

/// F1 over unordered point pairs, with "same predicted cluster" as the
/// positive prediction and "same true class" as ground truth.
pub fn pairwise_f1(truth: &[usize], pred: &[usize]) -> Result<f64, EvalError> {
    check_lengths(truth.len(), pred.len())?;
    if truth.len() < 2 {
        return Err(EvalError::Config("pairwise F1 needs at least 2 points".into()));
    }
    let t = contingency(truth, pred);
    let tp: u64 = t.cells.values().map(|&c| pairs(c)).sum();
    let predicted: u64 = t.cols.values().map(|&c| pairs(c)).sum();
    let actual: u64 = t.rows.values().map(|&c| pairs(c)).sum();
    if predicted == 0 || tp == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * tp as f64 / (predicted + actual) as f64)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean silhouette coefficient with Euclidean distances.
pub fn silhouette(points: &Matrix<f64>, assignments: &[usize]) -> Result<f64, EvalError> {
    check_lengths(points.rows(), assignments.len())?;
    let k = assignments.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    let nonempty = sizes.iter().filter(|&&s| s > 0).count();
    if nonempty < 2 {
        return Err(EvalError::Config("silhouette needs at least 2 nonempty clusters".into()));
    }
    let n = points.rows();
    let mut total = 0.0;
    for i in 0..n {
        let own = assignments[i];
        if sizes[own] == 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sums[assignments[j]] += dist(points.row(i), points.row(j));
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / n as f64)
}
