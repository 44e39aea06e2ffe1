//! Softmax-regression probe on frozen embeddings.

use serde::{Deserialize, Serialize};

use super::{check_lengths, EvalError};
use crate::hgraph::Split;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub l2: f64,
    pub lr: f64,
    pub epochs: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { l2: 1e-3, lr: 0.1, epochs: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub train_accuracy: f64,
    pub valid_accuracy: Option<f64>,
    pub test_accuracy: f64,
}

fn softmax_rows(logits: &mut Matrix<f64>) {
    for r in 0..logits.rows() {
        let row = logits.row_mut(r);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            z += *v;
        }
        row.iter_mut().for_each(|v| *v /= z);
    }
}

fn logits(x: &Matrix<f64>, w: &Matrix<f64>, b: &Matrix<f64>) -> Matrix<f64> {
    let mut out = x.matmul(w);
    for r in 0..out.rows() {
        for (v, &bias) in out.row_mut(r).iter_mut().zip(b.row(0)) {
            *v += bias;
        }
    }
    out
}

/// Argmax per row; ties go to the smallest class index.
fn predict(x: &Matrix<f64>, w: &Matrix<f64>, b: &Matrix<f64>) -> Vec<usize> {
    let scores = logits(x, w, b);
    scores
        .row_iter()
        .map(|row| row.iter().enumerate().fold(0, |best, (c, &v)| if v > row[best] { c } else { best }))
        .collect()
}

fn fraction_correct(pred: &[usize], labels: &[usize], idx: &[usize]) -> f64 {
    idx.iter().zip(pred).filter(|(&i, &p)| labels[i] == p).count() as f64 / idx.len() as f64
}

/// Trains multinomial logistic regression with an L2 penalty on the weights
/// by full-batch gradient descent on `split.train` and scores the other parts.
pub fn linear_probe(
    emb: &Matrix<f64>,
    labels: &[usize],
    num_classes: usize,
    split: &Split,
    cfg: &ProbeConfig,
) -> Result<ProbeOutcome, EvalError> {
    check_lengths(emb.rows(), labels.len())?;
    if split.test.is_empty() {
        return Err(EvalError::Config("probe needs a nonempty test set".into()));
    }
    if split.train.is_empty() {
        return Err(EvalError::Config("probe needs a nonempty training set".into()));
    }
    if cfg.epochs == 0 || !(cfg.lr > 0.0) || !(cfg.l2 >= 0.0) {
        return Err(EvalError::Config(format!("invalid probe settings {cfg:?}")));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(EvalError::Config(format!("label {l} >= num_classes {num_classes}")));
    }
    let d = emb.cols();
    let x = emb.select_rows(&split.train);
    let n = x.rows() as f64;
    let mut w = Matrix::<f64>::zeros(d, num_classes);
    let mut b = Matrix::<f64>::zeros(1, num_classes);
    for _ in 0..cfg.epochs {
        let mut probs = logits(&x, &w, &b);
        softmax_rows(&mut probs);
        for (r, &i) in split.train.iter().enumerate() {
            let row = probs.row_mut(r);
            row[labels[i]] -= 1.0;
            row.iter_mut().for_each(|v| *v /= n);
        }
        let mut gw = x.matmul_tn(&probs);
        for (g, &wv) in gw.as_mut_slice().iter_mut().zip(w.as_slice()) {
            *g += cfg.l2 * wv;
        }
        let mut gb = vec![0.0; num_classes];
        for r in 0..probs.rows() {
            for (a, &v) in gb.iter_mut().zip(probs.row(r)) {
                *a += v;
            }
        }
        for (wv, g) in w.as_mut_slice().iter_mut().zip(gw.as_slice()) {
            *wv -= cfg.lr * g;
        }
        for (bv, g) in b.as_mut_slice().iter_mut().zip(&gb) {
            *bv -= cfg.lr * g;
        }
    }
    let score = |idx: &[usize]| fraction_correct(&predict(&emb.select_rows(idx), &w, &b), labels, idx);
    Ok(ProbeOutcome {
        train_accuracy: score(&split.train),
        valid_accuracy: (!split.valid.is_empty()).then(|| score(&split.valid)),
        test_accuracy: score(&split.test),
    })
}
