//! Hypergraph encoders, projection heads and the membership discriminator.
//!
//! Parameters live in one flat list of named matrices so the optimizer,
//! serialization and gradient checks can treat them uniformly. A [`Layout`]
//! maps architectural roles onto positions in that list.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diff::{DiffError, Tape, Var};
use crate::hgraph::{compute_degrees, Hypergraph};
use crate::linalg::{Matrix, Real};
use crate::seed::{self, StreamRng};
use crate::sparse::SparseOp;

/// Initial value of every PReLU slope.
pub const PRELU_INIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    #[default]
    MeanPool,
    Hgnn,
}

/// Architectural role of a parameter tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamGroup {
    ThetaE,
    ThetaV,
    Theta,
    Bias,
    Slope,
    NodeHead,
    HyperedgeHead,
    Discriminator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub group: ParamGroup,
    pub rows: usize,
    pub cols: usize,
    /// Whether decoupled weight decay applies.
    pub decay: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("dimension {name} must be positive")]
    ZeroDim { name: &'static str },
    #[error("expected {expected} parameter tensors, found {found}")]
    TensorCount { expected: usize, found: usize },
    #[error("parameter {name} has shape {found:?}, expected {expected:?}")]
    TensorShape { name: String, expected: (usize, usize), found: (usize, usize) },
    #[error("features have {found} columns, model expects {expected}")]
    InputDim { expected: usize, found: usize },
}

/// Sizes that fully determine the parameter layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub kind: EncoderKind,
    pub input_dim: usize,
    pub node_dim: usize,
    /// Hyperedge embedding size for the mean-pool encoder. The HGNN encoder
    /// ignores it: its hyperedge rows keep the width of the previous layer.
    pub hyperedge_dim: usize,
    pub proj_hidden: usize,
    pub layers: usize,
}

impl ModelDims {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("input_dim", self.input_dim),
            ("node_dim", self.node_dim),
            ("hyperedge_dim", self.hyperedge_dim),
            ("proj_hidden", self.proj_hidden),
            ("layers", self.layers),
        ] {
            if v == 0 {
                return Err(ModelError::ZeroDim { name });
            }
        }
        Ok(())
    }

    /// Width of the final hyperedge embeddings.
    pub fn hyperedge_out_dim(&self) -> usize {
        match self.kind {
            EncoderKind::MeanPool => self.hyperedge_dim,
            EncoderKind::Hgnn if self.layers == 1 => self.input_dim,
            EncoderKind::Hgnn => self.node_dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerIdx {
    MeanPool { theta_e: usize, b_e: usize, slope_e: usize, theta_v: usize, b_v: usize, slope_v: usize },
    Hgnn { theta: usize, b: usize, slope: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadIdx {
    pub w1: usize,
    pub b1: usize,
    pub w2: usize,
    pub b2: usize,
}

/// Positions of each role in the flat parameter list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub layers: Vec<LayerIdx>,
    pub node_head: HeadIdx,
    pub hyperedge_head: HeadIdx,
    pub discriminator: usize,
}

fn build_specs(dims: &ModelDims) -> (Vec<ParamSpec>, Layout) {
    let mut specs = Vec::new();
    let mut add = |name: String, group: ParamGroup, rows: usize, cols: usize, decay: bool| {
        specs.push(ParamSpec { name, group, rows, cols, decay });
        specs.len() - 1
    };
    let mut layers = Vec::with_capacity(dims.layers);
    let mut width = dims.input_dim;
    for k in 0..dims.layers {
        match dims.kind {
            EncoderKind::MeanPool => {
                let (he, nd) = (dims.hyperedge_dim, dims.node_dim);
                let theta_e = add(format!("layer{k}.theta_e"), ParamGroup::ThetaE, width, he, true);
                let b_e = add(format!("layer{k}.b_e"), ParamGroup::Bias, 1, he, false);
                let slope_e = add(format!("layer{k}.slope_e"), ParamGroup::Slope, 1, 1, false);
                let theta_v = add(format!("layer{k}.theta_v"), ParamGroup::ThetaV, he, nd, true);
                let b_v = add(format!("layer{k}.b_v"), ParamGroup::Bias, 1, nd, false);
                let slope_v = add(format!("layer{k}.slope_v"), ParamGroup::Slope, 1, 1, false);
                layers.push(LayerIdx::MeanPool { theta_e, b_e, slope_e, theta_v, b_v, slope_v });
            }
            EncoderKind::Hgnn => {
                let theta = add(format!("layer{k}.theta"), ParamGroup::Theta, width, dims.node_dim, true);
                let b = add(format!("layer{k}.b"), ParamGroup::Bias, 1, dims.node_dim, false);
                let slope = add(format!("layer{k}.slope"), ParamGroup::Slope, 1, 1, false);
                layers.push(LayerIdx::Hgnn { theta, b, slope });
            }
        }
        width = dims.node_dim;
    }
    let mut head = |prefix: &str, group: ParamGroup, d: usize| HeadIdx {
        w1: add(format!("{prefix}.w1"), group, d, dims.proj_hidden, true),
        b1: add(format!("{prefix}.b1"), group, 1, dims.proj_hidden, false),
        w2: add(format!("{prefix}.w2"), group, dims.proj_hidden, d, true),
        b2: add(format!("{prefix}.b2"), group, 1, d, false),
    };
    let node_head = head("node_head", ParamGroup::NodeHead, dims.node_dim);
    let hyperedge_head = head("hyperedge_head", ParamGroup::HyperedgeHead, dims.hyperedge_out_dim());
    let discriminator =
        add("discriminator".into(), ParamGroup::Discriminator, dims.node_dim, dims.hyperedge_out_dim(), true);
    (specs, Layout { layers, node_head, hyperedge_head, discriminator })
}

/// Uniform entries in `±√(6 / (rows + cols))`.
pub fn glorot_init(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-bound..=bound)).collect();
    Matrix::from_vec(rows, cols, data).expect("glorot shape")
}

/// Every trainable tensor of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    dims: ModelDims,
    specs: Vec<ParamSpec>,
    layout: Layout,
    tensors: Vec<Matrix<T>>,
}

impl<T: Real> ModelParams<T> {
    /// Glorot weights, zero biases and `0.25` slopes, drawn from the init stream of `run_seed`.
    pub fn init(dims: ModelDims, run_seed: u64) -> Result<Self, ModelError> {
        dims.validate()?;
        let (specs, layout) = build_specs(&dims);
        let mut rng: StreamRng = seed::stream(run_seed, &[seed::tag::INIT]);
        let tensors = specs
            .iter()
            .map(|s| {
                let m = match s.group {
                    ParamGroup::Slope => Matrix::filled(1, 1, PRELU_INIT),
                    _ if s.rows == 1 && !s.decay => Matrix::zeros(1, s.cols),
                    _ => glorot_init(s.rows, s.cols, &mut rng),
                };
                m.cast::<T>()
            })
            .collect();
        Ok(Self { dims, specs, layout, tensors })
    }

    /// Rebuilds parameters from tensors in layout order, checking shapes.
    pub fn from_tensors(dims: ModelDims, tensors: Vec<Matrix<T>>) -> Result<Self, ModelError> {
        dims.validate()?;
        let (specs, layout) = build_specs(&dims);
        if specs.len() != tensors.len() {
            return Err(ModelError::TensorCount { expected: specs.len(), found: tensors.len() });
        }
        for (s, t) in specs.iter().zip(&tensors) {
            if t.shape() != (s.rows, s.cols) {
                return Err(ModelError::TensorShape { name: s.name.clone(), expected: (s.rows, s.cols), found: t.shape() });
            }
        }
        Ok(Self { dims, specs, layout, tensors })
    }

    pub fn dims(&self) -> &ModelDims {
        &self.dims
    }

    pub fn specs(&self) -> &[ParamSpec] {
        &self.specs
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn tensors(&self) -> &[Matrix<T>] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Matrix<T>] {
        &mut self.tensors
    }

    pub fn into_tensors(self) -> Vec<Matrix<T>> {
        self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Matrix<T>> {
        self.specs.iter().position(|s| s.name == name).map(|i| &self.tensors[i])
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Matrix::len).sum()
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        ModelParams {
            dims: self.dims,
            specs: self.specs.clone(),
            layout: self.layout.clone(),
            tensors: self.tensors.iter().map(Matrix::cast).collect(),
        }
    }

    /// Records every tensor on `tape`, as trainable leaves or as constants.
    pub fn bind(&self, tape: &mut Tape<T>, trainable: bool) -> Vec<Var> {
        self.tensors
            .iter()
            .map(|t| if trainable { tape.param(t.clone()) } else { tape.constant(t.clone()) })
            .collect()
    }
}

/// Normalized incidence operators for one hypergraph and encoder kind.
#[derive(Debug, Clone)]
pub struct GraphOps<T> {
    pub node_to_hyperedge: Arc<SparseOp<T>>,
    pub hyperedge_to_node: Arc<SparseOp<T>>,
}

impl<T: Real> GraphOps<T> {
    pub fn new(kind: EncoderKind, h: &Hypergraph) -> Self {
        let d = compute_degrees(h);
        let (n2e, e2n) = match kind {
            EncoderKind::MeanPool => (h.node_to_hyperedge_mean(&d), h.hyperedge_to_node_mean(&d)),
            EncoderKind::Hgnn => (h.node_to_hyperedge_hgnn(&d), h.hyperedge_to_node_hgnn(&d)),
        };
        Self { node_to_hyperedge: Arc::new(n2e), hyperedge_to_node: Arc::new(e2n) }
    }
}

/// Runs the encoder on the tape, returning final `(P, Q)`.
pub fn encode<T: Real>(
    tape: &mut Tape<T>,
    layout: &Layout,
    vars: &[Var],
    x: Var,
    ops: &GraphOps<T>,
) -> Result<(Var, Var), DiffError> {
    let mut p = x;
    let mut q = None;
    for layer in &layout.layers {
        match *layer {
            LayerIdx::MeanPool { theta_e, b_e, slope_e, theta_v, b_v, slope_v } => {
                let pooled = tape.aggregate(p, ops.node_to_hyperedge.clone())?;
                let pre = tape.linear(pooled, vars[theta_e], vars[b_e])?;
                let qk = tape.prelu(pre, vars[slope_e])?;
                let pooled = tape.aggregate(qk, ops.hyperedge_to_node.clone())?;
                let pre = tape.linear(pooled, vars[theta_v], vars[b_v])?;
                p = tape.prelu(pre, vars[slope_v])?;
                q = Some(qk);
            }
            LayerIdx::Hgnn { theta, b, slope } => {
                let qk = tape.aggregate(p, ops.node_to_hyperedge.clone())?;
                let pooled = tape.aggregate(qk, ops.hyperedge_to_node.clone())?;
                let pre = tape.linear(pooled, vars[theta], vars[b])?;
                p = tape.prelu(pre, vars[slope])?;
                q = Some(qk);
            }
        }
    }
    Ok((p, q.expect("at least one layer")))
}

/// Two-layer head `ELU(x W1 + b1) W2 + b2`.
pub fn project<T: Real>(tape: &mut Tape<T>, head: &HeadIdx, vars: &[Var], input: Var) -> Result<Var, DiffError> {
    let hidden = tape.linear(input, vars[head.w1], vars[head.b1])?;
    let hidden = tape.elu(hidden)?;
    tape.linear(hidden, vars[head.w2], vars[head.b2])
}

/// Gradient-free encoder forward, returning `(P, Q)`.
pub fn encode_values<T: Real>(
    params: &ModelParams<T>,
    x: &Matrix<T>,
    h: &Hypergraph,
) -> Result<(Matrix<T>, Matrix<T>), DiffError> {
    if x.cols() != params.dims.input_dim {
        return Err(DiffError::Contract {
            op: "encode",
            detail: format!("features have {} columns, model expects {}", x.cols(), params.dims.input_dim),
        });
    }
    let ops = GraphOps::new(params.dims.kind, h);
    let mut tape = Tape::new();
    let vars = params.bind(&mut tape, false);
    let xv = tape.constant(x.clone());
    let (p, q) = encode(&mut tape, &params.layout, &vars, xv, &ops)?;
    Ok((tape.value(p).clone(), tape.value(q).clone()))
}

/// Gradient-free projection of `(P, Q)` to `(Z, Y)`.
pub fn project_values<T: Real>(
    params: &ModelParams<T>,
    p: &Matrix<T>,
    q: &Matrix<T>,
) -> Result<(Matrix<T>, Matrix<T>), DiffError> {
    let mut tape = Tape::new();
    let vars = params.bind(&mut tape, false);
    let (pv, qv) = (tape.constant(p.clone()), tape.constant(q.clone()));
    let z = project(&mut tape, &params.layout.node_head, &vars, pv)?;
    let y = project(&mut tape, &params.layout.hyperedge_head, &vars, qv)?;
    Ok((tape.value(z).clone(), tape.value(y).clone()))
}

/// `σ(zᵀ S y)` for a single pair.
pub fn discriminate<T: Real>(s: &Matrix<T>, z: &[T], y: &[T]) -> T {
    assert_eq!((z.len(), y.len()), s.shape(), "discriminator shape mismatch");
    let mut acc = T::zero();
    for (a, &zi) in z.iter().enumerate() {
        let row = s.row(a);
        acc += zi * row.iter().zip(y).map(|(&sv, &yv)| sv * yv).sum::<T>();
    }
    T::one() / (T::one() + (-acc).exp())
}
