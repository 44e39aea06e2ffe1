//! AdamW with decoupled weight decay.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix, Real};

#[derive(Debug, Error, PartialEq)]
pub enum OptimError {
    #[error("gradient for parameter {index} contains a non-finite value")]
    NonFiniteGradient { index: usize },
    #[error("parameter {index}: gradient shape {grad:?} does not match {param:?}")]
    Shape { index: usize, param: (usize, usize), grad: (usize, usize) },
    #[error("expected {expected} tensors, got {found}")]
    Count { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 1e-5 }
    }
}

/// Moment estimates for a fixed list of parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamW<T> {
    pub config: AdamWConfig,
    decay: Vec<bool>,
    m: Vec<Matrix<T>>,
    v: Vec<Matrix<T>>,
    step: u64,
}

impl<T: Real> AdamW<T> {
    /// `decay[i]` selects whether tensor `i` receives weight decay.
    pub fn new(config: AdamWConfig, params: &[Matrix<T>], decay: Vec<bool>) -> Self {
        assert_eq!(params.len(), decay.len(), "one decay flag per tensor");
        let zeros = || params.iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect();
        Self { config, decay, m: zeros(), v: zeros(), step: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update. Fails without touching any state if a gradient is non-finite.
    pub fn step(&mut self, params: &mut [Matrix<T>], grads: &[Matrix<T>]) -> Result<(), OptimError> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(OptimError::Count { expected: self.m.len(), found: params.len().min(grads.len()) });
        }
        for (index, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() {
                return Err(OptimError::Shape { index, param: p.shape(), grad: g.shape() });
            }
            if !g.all_finite() {
                return Err(OptimError::NonFiniteGradient { index });
            }
        }
        self.step += 1;
        let c = self.config;
        let t = self.step as f64;
        let (b1, b2) = (T::lit(c.beta1), T::lit(c.beta2));
        let bc1 = T::lit(1.0 - c.beta1.powf(t));
        let bc2 = T::lit(1.0 - c.beta2.powf(t));
        let (lr, eps) = (T::lit(c.lr), T::lit(c.eps));
        let shrink = T::one() - T::lit(c.lr * c.weight_decay);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let decay = self.decay[i] && c.weight_decay != 0.0;
            let (m, v) = (self.m[i].as_mut_slice(), self.v[i].as_mut_slice());
            for (((w, &gi), mi), vi) in p.as_mut_slice().iter_mut().zip(g.as_slice()).zip(m).zip(v) {
                if decay {
                    *w *= shrink;
                }
                *mi = b1 * *mi + (T::one() - b1) * gi;
                *vi = b2 * *vi + (T::one() - b2) * gi * gi;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_without_decay_is_identity() {
        let mut p = vec![Matrix::from_rows(&[vec![1.0, -2.0]]).unwrap()];
        let before = p.clone();
        let cfg = AdamWConfig { weight_decay: 0.0, ..AdamWConfig::default() };
        let mut opt = AdamW::new(cfg, &p, vec![true]);
        opt.step(&mut p, &[Matrix::zeros(1, 2)]).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn pure_decay_scales_weights() {
        let mut p = vec![Matrix::from_rows(&[vec![1.0, -2.0]]).unwrap(), Matrix::filled(1, 1, 3.0)];
        let cfg = AdamWConfig { lr: 1.0, weight_decay: 0.1, ..AdamWConfig::default() };
        let mut opt = AdamW::new(cfg, &p, vec![true, false]);
        opt.step(&mut p, &[Matrix::zeros(1, 2), Matrix::zeros(1, 1)]).unwrap();
        assert_eq!(p[0].as_slice(), &[0.9, -1.8]);
        assert_eq!(p[1].as_slice(), &[3.0]);
    }

    #[test]
    fn matches_recurrence_for_constant_gradient() {
        let cfg = AdamWConfig::default();
        let mut p = vec![Matrix::filled(1, 1, 0.5f64)];
        let mut opt = AdamW::new(cfg, &p, vec![true]);
        let (mut theta, mut m, mut v) = (0.5f64, 0.0f64, 0.0f64);
        for t in 1..=3 {
            opt.step(&mut p, &[Matrix::filled(1, 1, 1.0)]).unwrap();
            theta *= 1.0 - cfg.lr * cfg.weight_decay;
            m = 0.9 * m + 0.1;
            v = 0.999 * v + 0.001;
            let m_hat = m / (1.0 - 0.9f64.powi(t));
            let v_hat = v / (1.0 - 0.999f64.powi(t));
            theta -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            assert!((p[0].get(0, 0) - theta).abs() < 1e-10);
        }
        assert_eq!(opt.step_count(), 3);
    }

    #[test]
    fn rejects_non_finite_gradients() {
        let mut p = vec![Matrix::filled(1, 1, 0.5f32)];
        let mut opt = AdamW::new(AdamWConfig::default(), &p, vec![true]);
        let err = opt.step(&mut p, &[Matrix::filled(1, 1, f32::NAN)]);
        assert_eq!(err, Err(OptimError::NonFiniteGradient { index: 0 }));
        assert_eq!(opt.step_count(), 0);
    }

    #[test]
    fn quadratic_descends() {
        let cfg = AdamWConfig { lr: 1e-2, weight_decay: 0.0, ..AdamWConfig::default() };
        let mut p = vec![Matrix::from_rows(&[vec![3.0f64, -2.0]]).unwrap()];
        let mut opt = AdamW::new(cfg, &p, vec![true]);
        let loss = |w: &Matrix<f64>| w.as_slice().iter().map(|x| x * x).sum::<f64>();
        let mut prev = loss(&p[0]);
        for _ in 0..100 {
            let g = p[0].map(|x| 2.0 * x);
            opt.step(&mut p, &[g]).unwrap();
            let now = loss(&p[0]);
            assert!(now <= prev);
            prev = now;
        }
    }
}
