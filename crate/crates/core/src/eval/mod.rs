//! Evaluation of frozen embeddings.

mod kmeans;
mod metrics;
mod probe;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hgraph::Split;
use crate::linalg::Matrix;
use crate::seed::{self, tag};

pub use kmeans::{kmeans, ClusterResult, MAX_LLOYD_ITERATIONS};
pub use metrics::{accuracy, nmi, pairwise_f1, silhouette};
pub use probe::{linear_probe, ProbeConfig, ProbeOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("invalid evaluation configuration: {0}")]
    Config(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub(crate) fn check_lengths(left: usize, right: usize) -> Result<(), EvalError> {
    if left == right {
        Ok(())
    } else {
        Err(EvalError::LengthMismatch { left, right })
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub mean: f64,
    pub std: f64,
    pub per_split: Vec<f64>,
}

impl ClassificationSummary {
    pub fn from_values(per_split: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&per_split);
        Self { mean, std, per_split }
    }
}

/// Linear-probe test accuracy on each split, with mean and std.
pub fn evaluate_classification(
    emb: &Matrix<f64>,
    labels: &[usize],
    num_classes: usize,
    splits: &[Split],
    cfg: &ProbeConfig,
) -> Result<ClassificationSummary, EvalError> {
    if splits.is_empty() {
        return Err(EvalError::Config("at least one split is required".into()));
    }
    let per_split = splits
        .iter()
        .map(|s| linear_probe(emb, labels, num_classes, s, cfg).map(|o| o.test_accuracy))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassificationSummary::from_values(per_split))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringSummary {
    pub nmi: f64,
    pub f1: f64,
    pub per_run_nmi: Vec<f64>,
    pub per_run_f1: Vec<f64>,
}

/// Averages NMI and pairwise F1 over `runs` independently seeded k-means runs.
pub fn evaluate_clustering(
    emb: &Matrix<f64>,
    labels: &[usize],
    k: usize,
    runs: usize,
    run_seed: u64,
) -> Result<ClusteringSummary, EvalError> {
    if runs == 0 {
        return Err(EvalError::Config("runs must be at least 1".into()));
    }
    let mut per_run_nmi = Vec::with_capacity(runs);
    let mut per_run_f1 = Vec::with_capacity(runs);
    for r in 0..runs {
        let result = kmeans(emb, k, seed::derive_seed(run_seed, &[tag::KMEANS, r as u64]))?;
        per_run_nmi.push(nmi(labels, &result.assignments)?);
        per_run_f1.push(pairwise_f1(labels, &result.assignments)?);
    }
    Ok(ClusteringSummary {
        nmi: mean_std(&per_run_nmi).0,
        f1: mean_std(&per_run_f1).0,
        per_run_nmi,
        per_run_f1,
    })
}
