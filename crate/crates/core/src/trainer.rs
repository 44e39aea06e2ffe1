//! Full-batch self-supervised training.
//!
//! Each epoch draws two augmented views, adds self-loops, encodes and
//! projects both, evaluates the weighted contrastive objective and takes a
//! single AdamW step. All randomness is derived from the run seed, so a
//! configuration replays bit for bit.

use std::sync::Arc;
use std::time::Instant;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{make_views, AugmentConfig};
use crate::diff::{DiffError, Tape, Var};
use crate::hgraph::{add_self_loops, Hypergraph, LabeledDataset};
use crate::linalg::{Matrix, Real};
use crate::loss::{
    eligible_hyperedges, group_loss, membership_loss, node_loss, sample_membership_negatives, subsampled_contrast,
    total_loss, LossBreakdown, LossConfig, LossError, LossParts, MembershipSample, MembershipTargets,
};
use crate::model::{encode, encode_values, project, EncoderKind, GraphOps, Layout, ModelDims, ModelError, ModelParams};
use crate::optim::{AdamW, AdamWConfig, OptimError};
use crate::seed::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub augment: AugmentConfig,
    pub loss: LossConfig,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub node_dim: usize,
    pub hyperedge_dim: usize,
    pub proj_hidden: usize,
    pub encoder: EncoderKind,
    pub layers: usize,
    pub self_loops: bool,
    pub seed: u64,
    pub precision: Precision,
    /// Memberships per epoch for membership contrast; `None` uses all.
    pub membership_batch: Option<usize>,
}

impl Default for TrainConfig {
    /// The Cora co-citation settings.
    fn default() -> Self {
        Self {
            augment: AugmentConfig { p_f: 0.4, p_m: 0.4, p_n: 0.0, p_e: 0.0 },
            loss: LossConfig::default(),
            learning_rate: 5e-4,
            weight_decay: 1e-5,
            epochs: 300,
            node_dim: 512,
            hyperedge_dim: 512,
            proj_hidden: 512,
            encoder: EncoderKind::MeanPool,
            layers: 1,
            self_loops: true,
            seed: 0,
            precision: Precision::F32,
            membership_batch: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("epoch {epoch}: {source}")]
    Loss { epoch: usize, source: LossError },
    #[error("epoch {epoch}: non-finite loss (breakdown {breakdown:?})")]
    NonFiniteLoss { epoch: usize, breakdown: Option<LossBreakdown> },
    #[error("epoch {epoch}: {source}")]
    Optim { epoch: usize, source: OptimError },
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        self.augment.validate().map_err(|e| TrainError::Config(e.to_string()))?;
        self.loss.validate().map_err(|e| TrainError::Config(e.to_string()))?;
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(TrainError::Config(format!("weight_decay must be nonnegative, got {}", self.weight_decay)));
        }
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if self.membership_batch == Some(0) {
            return Err(TrainError::Config("membership_batch must be at least 1".into()));
        }
        Ok(())
    }

    pub fn model_dims(&self, input_dim: usize) -> ModelDims {
        ModelDims {
            kind: self.encoder,
            input_dim,
            node_dim: self.node_dim,
            hyperedge_dim: self.hyperedge_dim,
            proj_hidden: self.proj_hidden,
            layers: self.layers,
        }
    }
}

/// Trained (or randomly initialized) encoder with its training record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: ModelParams<f64>,
    pub self_loops: bool,
    pub loss_trace: Vec<f64>,
    pub breakdown: Vec<LossBreakdown>,
    pub epoch_ms: Vec<f64>,
    /// Memberships without a valid negative, skipped in membership contrast.
    pub skipped_memberships: usize,
}

impl TrainedModel {
    /// Untrained encoder with the same architecture and initialization.
    pub fn random_init(input_dim: usize, cfg: &TrainConfig) -> Result<Self, TrainError> {
        let params = ModelParams::init(cfg.model_dims(input_dim), cfg.seed)?;
        Ok(Self {
            params,
            self_loops: cfg.self_loops,
            loss_trace: Vec::new(),
            breakdown: Vec::new(),
            epoch_ms: Vec::new(),
            skipped_memberships: 0,
        })
    }

    pub fn mean_epoch_ms(&self) -> f64 {
        mean_or_zero(&self.epoch_ms)
    }
}

fn mean_or_zero(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Wall-clock duration of each epoch in milliseconds.
#[derive(Debug, Default, Clone)]
pub struct EpochTimer {
    samples: Vec<f64>,
    started: Option<Instant>,
}

impl EpochTimer {
    pub fn start(&mut self) {
        self.started = Some(Instant::now());
    }

    pub fn stop(&mut self) {
        if let Some(t) = self.started.take() {
            self.samples.push(t.elapsed().as_secs_f64() * 1e3);
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn mean_ms(&self) -> f64 {
        mean_or_zero(&self.samples)
    }
}

/// Inputs for one evaluation of the objective.
pub struct EpochInputs<'a, T> {
    pub x1: &'a Matrix<T>,
    pub x2: &'a Matrix<T>,
    pub ops1: &'a GraphOps<T>,
    pub ops2: &'a GraphOps<T>,
    pub eligible: &'a Arc<[usize]>,
    pub targets: &'a MembershipTargets,
    pub sample: Option<&'a MembershipSample>,
}

/// Records the weighted objective for bound parameters `vars`.
///
/// `rng` feeds negative subsampling for node and group contrast; the group
/// subsample size is capped at the number of eligible hyperedges minus one.
pub fn objective<T: Real>(
    tape: &mut Tape<T>,
    layout: &Layout,
    vars: &[Var],
    inputs: &EpochInputs<'_, T>,
    cfg: &LossConfig,
    rng: &mut impl Rng,
) -> Result<LossParts, LossError> {
    let x1 = tape.constant(inputs.x1.clone());
    let x2 = tape.constant(inputs.x2.clone());
    let (p1, q1) = encode(tape, layout, vars, x1, inputs.ops1)?;
    let (p2, q2) = encode(tape, layout, vars, x2, inputs.ops2)?;
    let z1 = project(tape, &layout.node_head, vars, p1)?;
    let z2 = project(tape, &layout.node_head, vars, p2)?;
    let c = cfg.components;
    let (y1, y2) = if c.group || c.membership {
        (project(tape, &layout.hyperedge_head, vars, q1)?, project(tape, &layout.hyperedge_head, vars, q2)?)
    } else {
        (q1, q2)
    };

    let node = if c.node {
        Some(match cfg.negatives_k {
            Some(k) => subsampled_contrast(tape, z1, z2, cfg.tau_n, k, rng)?,
            None => node_loss(tape, z1, z2, cfg.tau_n)?,
        })
    } else {
        None
    };
    let group = if c.group {
        let population = inputs.eligible.len();
        Some(match cfg.negatives_k {
            Some(k) if population >= 2 && k < population - 1 => {
                let a = tape.gather_rows(y1, inputs.eligible.clone())?;
                let b = tape.gather_rows(y2, inputs.eligible.clone())?;
                subsampled_contrast(tape, a, b, cfg.tau_g, k, rng)?
            }
            _ => group_loss(tape, y1, y2, inputs.eligible, cfg.tau_g)?,
        })
    } else {
        None
    };
    let membership = if c.membership {
        let sample = inputs.sample.ok_or_else(|| LossError::Config("membership negatives were not sampled".into()))?;
        let s = vars[layout.discriminator];
        Some(membership_loss(tape, z1, y2, z2, y1, s, inputs.targets, sample, cfg.tau_m, cfg.membership_mode)?)
    } else {
        None
    };
    total_loss(tape, node, group, membership, cfg)
}

/// Dataset-derived quantities that stay fixed across epochs.
pub struct TrainingData<T> {
    pub features: Matrix<T>,
    pub hypergraph: Hypergraph,
    pub targets: MembershipTargets,
    pub eligible: Arc<[usize]>,
}

impl<T: Real> TrainingData<T> {
    pub fn new(dataset: &LabeledDataset) -> Self {
        let hypergraph = dataset.hypergraph.clone();
        Self {
            features: dataset.features.cast(),
            targets: MembershipTargets::new(&hypergraph),
            eligible: eligible_hyperedges(&hypergraph).into(),
            hypergraph,
        }
    }
}

/// Result of one forward/backward evaluation.
pub struct EpochGradients<T> {
    pub breakdown: LossBreakdown,
    pub grads: Vec<Matrix<T>>,
    pub skipped_memberships: usize,
}

fn membership_subset(cfg: &TrainConfig, total: usize, epoch: u64) -> Option<Vec<usize>> {
    let batch = cfg.membership_batch?;
    if batch >= total {
        return None;
    }
    let mut rng = seed::stream(cfg.seed, &[tag::MEMBERSHIP_BATCH, epoch]);
    let mut picked = index::sample(&mut rng, total, batch).into_vec();
    picked.sort_unstable();
    Some(picked)
}

/// Loss and parameter gradients for `epoch` of a run configured by `cfg`.
pub fn epoch_gradients<T: Real>(
    data: &TrainingData<T>,
    params: &ModelParams<T>,
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<EpochGradients<T>, TrainError> {
    let e = epoch as u64;
    let (v1, v2) = make_views(&data.features, &data.hypergraph, &cfg.augment, cfg.seed, e);
    let prepare = |h: Hypergraph| if cfg.self_loops { add_self_loops(&h) } else { h };
    let ops1 = GraphOps::new(cfg.encoder, &prepare(v1.hypergraph));
    let ops2 = GraphOps::new(cfg.encoder, &prepare(v2.hypergraph));
    let sample = cfg.loss.components.membership.then(|| {
        let subset = membership_subset(cfg, data.targets.len(), e);
        let mut rng = seed::stream(cfg.seed, &[tag::MEMBERSHIP_NEGATIVES, e]);
        sample_membership_negatives(&data.targets, subset.as_deref(), &mut rng)
    });
    let inputs = EpochInputs {
        x1: &v1.features,
        x2: &v2.features,
        ops1: &ops1,
        ops2: &ops2,
        eligible: &data.eligible,
        targets: &data.targets,
        sample: sample.as_ref(),
    };
    let mut tape = Tape::new();
    let vars = params.bind(&mut tape, true);
    let mut rng = seed::stream(cfg.seed, &[tag::SUBSAMPLE, e]);
    let parts = match objective(&mut tape, params.layout(), &vars, &inputs, &cfg.loss, &mut rng) {
        Ok(p) => p,
        Err(LossError::Diff(DiffError::NonFinite { .. })) => {
            return Err(TrainError::NonFiniteLoss { epoch, breakdown: None })
        }
        Err(source) => return Err(TrainError::Loss { epoch, source }),
    };
    let breakdown = parts.breakdown(&tape);
    if !breakdown.total.is_finite() {
        return Err(TrainError::NonFiniteLoss { epoch, breakdown: Some(breakdown) });
    }
    tape.backward(parts.total).map_err(|e| match e {
        DiffError::NonFinite { .. } => TrainError::NonFiniteLoss { epoch, breakdown: Some(breakdown) },
        other => TrainError::Loss { epoch, source: other.into() },
    })?;
    let grads = vars.iter().map(|&v| tape.grad_or_zeros(v)).collect();
    let skipped_memberships = sample.map_or(0, |s| s.skipped);
    Ok(EpochGradients { breakdown, grads, skipped_memberships })
}

fn train_as<T: Real>(dataset: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainedModel, TrainError> {
    let data = TrainingData::<T>::new(dataset);
    let mut params = ModelParams::<f64>::init(cfg.model_dims(dataset.num_features()), cfg.seed)?.cast::<T>();
    let decay = params.specs().iter().map(|s| s.decay).collect();
    let adam = AdamWConfig { lr: cfg.learning_rate, weight_decay: cfg.weight_decay, ..AdamWConfig::default() };
    let mut opt = AdamW::new(adam, params.tensors(), decay);
    let mut timer = EpochTimer::default();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut breakdown = Vec::with_capacity(cfg.epochs);
    let mut skipped = 0;
    for epoch in 0..cfg.epochs {
        timer.start();
        let step = epoch_gradients(&data, &params, cfg, epoch)?;
        opt.step(params.tensors_mut(), &step.grads).map_err(|source| match source {
            OptimError::NonFiniteGradient { .. } => {
                TrainError::NonFiniteLoss { epoch, breakdown: Some(step.breakdown) }
            }
            other => TrainError::Optim { epoch, source: other },
        })?;
        timer.stop();
        loss_trace.push(step.breakdown.total);
        breakdown.push(step.breakdown);
        skipped = step.skipped_memberships;
    }
    Ok(TrainedModel {
        params: params.cast(),
        self_loops: cfg.self_loops,
        loss_trace,
        breakdown,
        epoch_ms: timer.samples().to_vec(),
        skipped_memberships: skipped,
    })
}

/// Trains an encoder on `dataset`, which should already have isolated
/// nodes removed.
pub fn train(dataset: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainedModel, TrainError> {
    cfg.validate()?;
    match cfg.precision {
        Precision::F32 => train_as::<f32>(dataset, cfg),
        Precision::F64 => train_as::<f64>(dataset, cfg),
    }
}

/// Node embeddings `P` of the clean hypergraph, without projection heads.
pub fn embed(model: &TrainedModel, dataset: &LabeledDataset) -> Result<Matrix<f64>, DiffError> {
    let h = if model.self_loops { add_self_loops(&dataset.hypergraph) } else { dataset.hypergraph.clone() };
    encode_values(&model.params, &dataset.features, &h).map(|(p, _)| p)
}
