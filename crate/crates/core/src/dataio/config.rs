use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, to_json_pretty, write_bytes, DataError};
use crate::augment::AugmentConfig;
use crate::eval::ProbeConfig;
use crate::loss::{ComponentSwitches, LossConfig, MembershipMode};
use crate::model::EncoderKind;
use crate::trainer::{Precision, TrainConfig};

/// Flat run configuration. Unknown keys are rejected and missing keys take
/// the defaults of [`RunConfigFile::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfigFile {
    /// Free-form label, echoed into run summaries.
    pub name: Option<String>,
    pub p_f: f64,
    pub p_m: f64,
    pub p_n: f64,
    pub p_e: f64,
    pub tau_n: f64,
    pub tau_g: f64,
    pub tau_m: f64,
    pub omega_g: f64,
    pub omega_m: f64,
    pub negatives_k: Option<usize>,
    pub use_node_loss: bool,
    pub use_group_loss: bool,
    pub use_membership_loss: bool,
    pub membership_mode: MembershipMode,
    pub membership_batch: Option<usize>,
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
    pub probe_l2: f64,
    pub probe_lr: f64,
    pub probe_epochs: usize,
    pub kmeans_runs: usize,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        Self::from_parts(None, &TrainConfig::default(), &ProbeConfig::default(), 5)
    }
}

impl RunConfigFile {
    pub fn from_parts(name: Option<String>, t: &TrainConfig, p: &ProbeConfig, kmeans_runs: usize) -> Self {
        Self {
            name,
            p_f: t.augment.p_f,
            p_m: t.augment.p_m,
            p_n: t.augment.p_n,
            p_e: t.augment.p_e,
            tau_n: t.loss.tau_n,
            tau_g: t.loss.tau_g,
            tau_m: t.loss.tau_m,
            omega_g: t.loss.omega_g,
            omega_m: t.loss.omega_m,
            negatives_k: t.loss.negatives_k,
            use_node_loss: t.loss.components.node,
            use_group_loss: t.loss.components.group,
            use_membership_loss: t.loss.components.membership,
            membership_mode: t.loss.membership_mode,
            membership_batch: t.membership_batch,
            learning_rate: t.learning_rate,
            weight_decay: t.weight_decay,
            epochs: t.epochs,
            node_dim: t.node_dim,
            hyperedge_dim: t.hyperedge_dim,
            proj_hidden: t.proj_hidden,
            encoder: t.encoder,
            layers: t.layers,
            self_loops: t.self_loops,
            seed: t.seed,
            precision: t.precision,
            probe_l2: p.l2,
            probe_lr: p.lr,
            probe_epochs: p.epochs,
            kmeans_runs,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            augment: AugmentConfig { p_f: self.p_f, p_m: self.p_m, p_n: self.p_n, p_e: self.p_e },
            loss: LossConfig {
                tau_n: self.tau_n,
                tau_g: self.tau_g,
                tau_m: self.tau_m,
                omega_g: self.omega_g,
                omega_m: self.omega_m,
                negatives_k: self.negatives_k,
                components: ComponentSwitches {
                    node: self.use_node_loss,
                    group: self.use_group_loss,
                    membership: self.use_membership_loss,
                },
                membership_mode: self.membership_mode,
            },
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            epochs: self.epochs,
            node_dim: self.node_dim,
            hyperedge_dim: self.hyperedge_dim,
            proj_hidden: self.proj_hidden,
            encoder: self.encoder,
            layers: self.layers,
            self_loops: self.self_loops,
            seed: self.seed,
            precision: self.precision,
            membership_batch: self.membership_batch,
        }
    }

    pub fn probe_config(&self) -> ProbeConfig {
        ProbeConfig { l2: self.probe_l2, lr: self.probe_lr, epochs: self.probe_epochs }
    }

    /// Checks every value range that the typed configs enforce.
    pub fn validate(&self) -> Result<(), DataError> {
        self.train_config().validate().map_err(|e| DataError::invalid("config", e.to_string()))?;
        let p = self.probe_config();
        if p.epochs == 0 || !(p.lr > 0.0) || !(p.l2 >= 0.0) {
            return Err(DataError::invalid("probe", format!("invalid probe settings {p:?}")));
        }
        if self.kmeans_runs == 0 {
            return Err(DataError::invalid("kmeans_runs", "must be at least 1"));
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<RunConfigFile, DataError> {
    let cfg: RunConfigFile = serde_json::from_str(text).map_err(DataError::from_json)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfigFile, DataError> {
    parse_config(&read_text(path)?).map_err(|e| e.at(path))
}

pub fn save_config(cfg: &RunConfigFile, path: &Path) -> Result<(), DataError> {
    write_bytes(path, to_json_pretty(cfg).as_bytes())
}
