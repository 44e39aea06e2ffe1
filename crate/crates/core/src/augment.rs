//! Stochastic hypergraph augmentation.
//!
//! Masking removes memberships or zeroes feature columns; it never reindexes
//! nodes or hyperedges, so both views share the original index spaces.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hgraph::Hypergraph;
use crate::linalg::{Matrix, Real};
use crate::seed::{self, StreamRng};

#[derive(Debug, Error, PartialEq)]
#[error("augmentation rate {name} = {value} is outside [0, 1]")]
pub struct RateError {
    pub name: &'static str,
    pub value: f64,
}

/// Masking rates. Node and hyperedge masking default to off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub p_f: f64,
    pub p_m: f64,
    pub p_n: f64,
    pub p_e: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self { p_f: 0.0, p_m: 0.0, p_n: 0.0, p_e: 0.0 }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<(), RateError> {
        for (name, value) in [("p_f", self.p_f), ("p_m", self.p_m), ("p_n", self.p_n), ("p_e", self.p_e)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(RateError { name, value });
            }
        }
        Ok(())
    }
}

/// One augmented copy of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct View<T> {
    pub features: Matrix<T>,
    pub hypergraph: Hypergraph,
}

/// Draws `len` independent keep-flags, each true with probability `1 - p`.
fn keep_mask(len: usize, p: f64, rng: &mut impl Rng) -> Vec<bool> {
    (0..len).map(|_| rng.random::<f64>() >= p).collect()
}

/// Zeroes a random subset of feature columns, shared by every row.
pub fn mask_features<T: Real>(x: &Matrix<T>, p_f: f64, rng: &mut impl Rng) -> Matrix<T> {
    let keep = keep_mask(x.cols(), p_f, rng);
    let mut out = x.clone();
    for r in 0..out.rows() {
        for (v, &k) in out.row_mut(r).iter_mut().zip(&keep) {
            if !k {
                *v = T::zero();
            }
        }
    }
    out
}

/// Keeps each membership independently with probability `1 - p_m`.
pub fn mask_memberships(h: &Hypergraph, p_m: f64, rng: &mut impl Rng) -> Hypergraph {
    let keep = keep_mask(h.num_memberships(), p_m, rng);
    h.retain_memberships(|k, _| keep[k])
}

/// Removes every membership of each masked node.
pub fn mask_nodes(h: &Hypergraph, p_n: f64, rng: &mut impl Rng) -> Hypergraph {
    let keep = keep_mask(h.num_nodes(), p_n, rng);
    h.retain_memberships(|_, m| keep[m.node])
}

/// Removes every membership of each masked hyperedge.
pub fn mask_hyperedges(h: &Hypergraph, p_e: f64, rng: &mut impl Rng) -> Hypergraph {
    let keep = keep_mask(h.num_hyperedges(), p_e, rng);
    h.retain_memberships(|_, m| keep[m.hyperedge])
}

/// Applies the configured maskings once.
pub fn make_view<T: Real>(x: &Matrix<T>, h: &Hypergraph, cfg: &AugmentConfig, rng: &mut impl Rng) -> View<T> {
    let mut hypergraph = mask_memberships(h, cfg.p_m, rng);
    if cfg.p_n > 0.0 {
        hypergraph = mask_nodes(&hypergraph, cfg.p_n, rng);
    }
    if cfg.p_e > 0.0 {
        hypergraph = mask_hyperedges(&hypergraph, cfg.p_e, rng);
    }
    let features = mask_features(x, cfg.p_f, rng);
    View { features, hypergraph }
}

/// Stream used for view `view_index` of `epoch`.
pub fn view_stream(run_seed: u64, epoch: u64, view_index: u64) -> StreamRng {
    seed::stream(run_seed, &[seed::tag::VIEW, epoch, view_index])
}

/// Two independently sampled views with identical rates.
pub fn make_views<T: Real>(
    x: &Matrix<T>,
    h: &Hypergraph,
    cfg: &AugmentConfig,
    run_seed: u64,
    epoch: u64,
) -> (View<T>, View<T>) {
    let first = make_view(x, h, cfg, &mut view_stream(run_seed, epoch, 0));
    let second = make_view(x, h, cfg, &mut view_stream(run_seed, epoch, 1));
    (first, second)
}
